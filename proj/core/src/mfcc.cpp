#include "nsp/mfcc.hpp"

#include "nsp/errors.hpp"
#include "nsp/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace nsp {

int MfccConfig::frame_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * frame_len_ms / 1000.0));
}

int MfccConfig::hop_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * hop_ms / 1000.0));
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_corners_hz(const MfccConfig& cfg) {
  const double lo = hz_to_mel(cfg.low_hz);
  const double hi = hz_to_mel(cfg.high_hz);
  std::vector<double> corners(static_cast<std::size_t>(cfg.n_mel_filters) + 2);
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const double mel = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(corners.size() - 1);
    corners[i] = mel_to_hz(mel);
  }
  return corners;
}

const Eigen::VectorXd& hamming(int n) {
  thread_local Eigen::VectorXd w;
  if (w.size() != n) {
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      w(i) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    }
  }
  return w;
}

}  // namespace

Eigen::MatrixXd mel_filterbank(const MfccConfig& cfg) {
  const int n_bins = cfg.fft_size / 2 + 1;
  const auto corners = mel_corners_hz(cfg);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mel_filters, n_bins);
  for (int m = 0; m < cfg.n_mel_filters; ++m) {
    const double l = corners[static_cast<std::size_t>(m)];
    const double c = corners[static_cast<std::size_t>(m) + 1];
    const double r = corners[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * cfg.sample_rate_hz / cfg.fft_size;
      double w = 0.0;
      if (f > l && f <= c) {
        w = (f - l) / (c - l);
      } else if (f > c && f < r) {
        w = (r - f) / (r - c);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

Eigen::VectorXd mel_centers_hz(const MfccConfig& cfg) {
  const auto corners = mel_corners_hz(cfg);
  Eigen::VectorXd centers(cfg.n_mel_filters);
  for (int m = 0; m < cfg.n_mel_filters; ++m) centers(m) = corners[static_cast<std::size_t>(m) + 1];
  return centers;
}

Eigen::VectorXd dct_ortho(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += x(i) * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
    }
    c(k) = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
  }
  return c;
}

Eigen::VectorXd idct_ortho(const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      acc += std::sqrt((k == 0 ? 1.0 : 2.0) / n) * c(k) *
             std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
    }
    x(i) = acc;
  }
  return x;
}

Eigen::VectorXd log_mel_energies(std::span<const double> frame, const MfccConfig& cfg) {
  const int n = cfg.frame_samples();
  if (static_cast<int>(frame.size()) != n) {
    fail(ErrorKind::ShapeMismatch, "mfcc: frame has " + std::to_string(frame.size()) +
                                       " samples, expected " + std::to_string(n));
  }
  if (cfg.fft_size < n) fail(ErrorKind::InvalidArgument, "mfcc: fft_size smaller than frame");

  thread_local Eigen::MatrixXd fb;
  thread_local MfccConfig fb_cfg{};
  thread_local bool fb_ready = false;
  if (!fb_ready || fb_cfg.n_mel_filters != cfg.n_mel_filters || fb_cfg.fft_size != cfg.fft_size ||
      fb_cfg.sample_rate_hz != cfg.sample_rate_hz || fb_cfg.low_hz != cfg.low_hz ||
      fb_cfg.high_hz != cfg.high_hz) {
    fb = mel_filterbank(cfg);
    fb_cfg = cfg;
    fb_ready = true;
  }

  const Eigen::VectorXd& win = hamming(n);
  std::vector<double> shaped(static_cast<std::size_t>(n));
  shaped[0] = frame[0] * win(0);
  for (int i = 1; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    shaped[u] = (frame[u] - cfg.preemphasis * frame[u - 1]) * win(i);
  }

  const auto power = power_spectrum(shaped, static_cast<std::size_t>(cfg.fft_size));
  const Eigen::Map<const Eigen::VectorXd> spec(power.data(), static_cast<Eigen::Index>(power.size()));
  Eigen::VectorXd energies = fb * spec / static_cast<double>(cfg.fft_size);
  for (Eigen::Index m = 0; m < energies.size(); ++m) {
    energies(m) = std::log(std::max(energies(m), cfg.log_floor));
  }
  return energies;
}

Eigen::VectorXd mfcc(std::span<const double> frame, const MfccConfig& cfg) {
  return dct_ortho(log_mel_energies(frame, cfg)).head(cfg.n_cepstra);
}

FeatureSequence add_deltas(const FeatureSequence& f, int delta_window) {
  validate(f);
  const Eigen::Index t_len = f.frames();
  const Eigen::Index d = f.dim();
  if (delta_window < 1) fail(ErrorKind::InvalidArgument, "add_deltas: delta window must be >= 1");
  if (t_len < 2 * delta_window + 1) {
    fail(ErrorKind::TooShort, "add_deltas: sequence of " + std::to_string(t_len) +
                                  " frames is shorter than " +
                                  std::to_string(2 * delta_window + 1));
  }

  double denom = 0.0;
  for (int n = 1; n <= delta_window; ++n) denom += n * n;
  denom *= 2.0;

  const auto regress = [&](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t_len, d);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      for (int n = 1; n <= delta_window; ++n) {
        const Eigen::Index ahead = std::min<Eigen::Index>(t + n, t_len - 1);
        const Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
        out.row(t) += n * (x.row(ahead) - x.row(behind));
      }
    }
    return Eigen::MatrixXd(out / denom);
  };

  const Eigen::MatrixXd delta = regress(f.data);
  const Eigen::MatrixXd delta2 = regress(delta);

  FeatureSequence out;
  out.modality = f.modality;
  out.rate_hz = f.rate_hz;
  out.data.resize(t_len, 3 * d);
  out.data << f.data, delta, delta2;
  return out;
}

FeatureSequence extract_mfcc(const MultichannelSignal& audio, const MfccConfig& cfg) {
  validate(audio);
  if (audio.n_channels() != 1) {
    fail(ErrorKind::InvalidArgument, "extract_mfcc: expected mono audio, got " +
                                         std::to_string(audio.n_channels()) + " channels");
  }
  if (audio.sample_rate_hz != cfg.sample_rate_hz) {
    fail(ErrorKind::InvalidArgument, "extract_mfcc: wrong sample rate " +
                                         std::to_string(audio.sample_rate_hz) + " Hz, expected " +
                                         std::to_string(cfg.sample_rate_hz));
  }
  const auto w = WindowSpec{static_cast<std::size_t>(cfg.frame_samples()),
                            static_cast<std::size_t>(cfg.hop_samples())};
  const Framing framing = frame_signal(audio, w);

  FeatureSequence ceps;
  ceps.modality = Modality::Mfcc;
  ceps.rate_hz = w.frame_rate_hz(audio.sample_rate_hz);
  ceps.data.resize(static_cast<Eigen::Index>(framing.count), cfg.n_cepstra);
  const double* samples = audio.data.col(0).data();
  for (std::size_t t = 0; t < framing.count; ++t) {
    const std::span<const double> frame(samples + framing.offset(t), w.window_len_samples);
    ceps.data.row(static_cast<Eigen::Index>(t)) = mfcc(frame, cfg).transpose();
  }
  return add_deltas(ceps, cfg.delta_window);
}

}  // namespace nsp
