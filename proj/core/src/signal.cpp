#include "nsp/signal.hpp"

#include "nsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nsp {

namespace {

using cplx = std::complex<double>;

void check_finite_matrix(const Eigen::MatrixXd& m, ErrorKind kind, const char* what) {
  if (!m.allFinite()) fail(kind, std::string(what) + ": non-finite values");
}

// Bilinear transform s -> z with K = 2 fs.
cplx bilinear(cplx s, double fs_hz) {
  const double k = 2.0 * fs_hz;
  return (k + s) / (k - s);
}

}  // namespace

void validate(const MultichannelSignal& s) {
  if (s.data.rows() < 1 || s.data.cols() < 1) {
    fail(ErrorKind::ShapeMismatch, "signal must have at least one sample and one channel");
  }
  if (!(s.sample_rate_hz > 0.0) || !std::isfinite(s.sample_rate_hz)) {
    fail(ErrorKind::InvalidArgument, "signal sample rate must be positive");
  }
  check_finite_matrix(s.data, ErrorKind::NonFinite, "signal");
}

double IirFilter::max_pole_radius() const {
  double radius = 0.0;
  for (const auto& sec : sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(sec.a1 * sec.a1 - 4.0 * sec.a2, 0.0));
    const cplx r1 = (-sec.a1 + disc) / 2.0;
    const cplx r2 = (-sec.a1 - disc) / 2.0;
    radius = std::max({radius, std::abs(r1), std::abs(r2)});
  }
  return radius;
}

std::complex<double> IirFilter::response(double freq_hz, double fs_hz) const {
  const double w = 2.0 * std::numbers::pi * freq_hz / fs_hz;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const auto& sec : sections) {
    h *= (sec.b0 + sec.b1 * z1 + sec.b2 * z2) / (1.0 + sec.a1 * z1 + sec.a2 * z2);
  }
  return h;
}

double IirFilter::gain(double freq_hz, double fs_hz) const {
  return std::abs(response(freq_hz, fs_hz));
}

IirFilter identity_filter() { return IirFilter{{Biquad{}}}; }

IirFilter design_bandpass(double low_hz, double high_hz, int order, double fs_hz) {
  if (!(fs_hz > 0.0) || !(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < fs_hz / 2.0)) {
    fail(ErrorKind::InvalidFrequency,
         "design_bandpass: need 0 < low < high < fs/2, got low=" + std::to_string(low_hz) +
             " high=" + std::to_string(high_hz) + " fs=" + std::to_string(fs_hz));
  }
  if (order < 2 || order % 2 != 0) {
    fail(ErrorKind::InvalidArgument, "design_bandpass: order must be even and >= 2");
  }

  const int proto_order = order / 2;
  const double k = 2.0 * fs_hz;
  const double wl = k * std::tan(std::numbers::pi * low_hz / fs_hz);
  const double wh = k * std::tan(std::numbers::pi * high_hz / fs_hz);
  const double bw = wh - wl;
  const double w0_sq = wl * wh;

  // Analog lowpass prototype poles, mapped lowpass -> bandpass, then to z.
  std::vector<cplx> poles;
  poles.reserve(static_cast<std::size_t>(order));
  for (int i = 1; i <= proto_order; ++i) {
    const double theta = std::numbers::pi * (2.0 * i + proto_order - 1.0) / (2.0 * proto_order);
    const cplx p = std::polar(1.0, theta);
    const cplx pb = p * bw;
    const cplx root = std::sqrt(pb * pb - 4.0 * w0_sq);
    poles.push_back(bilinear((pb + root) / 2.0, fs_hz));
    poles.push_back(bilinear((pb - root) / 2.0, fs_hz));
  }

  // One section per upper-half-plane pole; real poles are paired up.
  constexpr double kImagEps = 1e-12;
  std::vector<cplx> upper;
  std::vector<double> real;
  for (const auto& z : poles) {
    if (z.imag() > kImagEps) {
      upper.push_back(z);
    } else if (std::abs(z.imag()) <= kImagEps) {
      real.push_back(z.real());
    }
  }
  std::sort(real.begin(), real.end());

  IirFilter f;
  for (const auto& z : upper) {
    f.sections.push_back(Biquad{1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)});
  }
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    f.sections.push_back(Biquad{1.0, 0.0, -1.0, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }
  if (f.sections.size() != static_cast<std::size_t>(proto_order)) {
    fail(ErrorKind::Unstable, "design_bandpass: could not pair poles into sections");
  }
  if (!(f.max_pole_radius() < 1.0)) {
    fail(ErrorKind::Unstable, "design_bandpass: designed pole on or outside the unit circle");
  }

  // Normalize to unity gain at the digital image of the analog center.
  const double center_hz = fs_hz * std::atan(std::sqrt(w0_sq) / k) / std::numbers::pi;
  const double g = f.gain(center_hz, fs_hz);
  const double per_section = std::pow(1.0 / g, 1.0 / static_cast<double>(f.sections.size()));
  for (auto& sec : f.sections) {
    sec.b0 *= per_section;
    sec.b1 *= per_section;
    sec.b2 *= per_section;
  }
  for (const auto& sec : f.sections) {
    if (!std::isfinite(sec.b0) || !std::isfinite(sec.a1) || !std::isfinite(sec.a2)) {
      fail(ErrorKind::Unstable, "design_bandpass: non-finite coefficients");
    }
  }
  return f;
}

IirFilter design_notch(double center_hz, double fs_hz, double quality) {
  if (!(fs_hz > 0.0) || !(center_hz > 0.0) || !(center_hz < fs_hz / 2.0)) {
    fail(ErrorKind::InvalidFrequency, "design_notch: need 0 < center < fs/2, got center=" +
                                          std::to_string(center_hz) +
                                          " fs=" + std::to_string(fs_hz));
  }
  if (!(quality > 0.0)) fail(ErrorKind::InvalidArgument, "design_notch: quality must be > 0");

  const double w0 = 2.0 * std::numbers::pi * center_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * quality);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  IirFilter f{{Biquad{1.0 / a0, -2.0 * cw / a0, 1.0 / a0, -2.0 * cw / a0, (1.0 - alpha) / a0}}};
  if (!(f.max_pole_radius() < 1.0)) {
    fail(ErrorKind::Unstable, "design_notch: designed pole on or outside the unit circle");
  }
  return f;
}

MultichannelSignal apply_filter(const IirFilter& f, const MultichannelSignal& s) {
  validate(s);
  MultichannelSignal out = s;
  const Eigen::Index n = s.data.rows();
  for (Eigen::Index c = 0; c < s.data.cols(); ++c) {
    double* x = out.data.col(c).data();
    for (const auto& sec : f.sections) {
      double z1 = 0.0;
      double z2 = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double in = x[i];
        const double y = sec.b0 * in + z1;
        z1 = sec.b1 * in - sec.a1 * y + z2;
        z2 = sec.b2 * in - sec.a2 * y;
        x[i] = y;
      }
    }
  }
  if (!out.data.allFinite()) fail(ErrorKind::NonFinite, "apply_filter: non-finite output");
  return out;
}

Framing frame_length(std::size_t n_samples, WindowSpec w) {
  if (w.window_len_samples == 0 || w.hop_samples == 0 ||
      w.hop_samples > w.window_len_samples) {
    fail(ErrorKind::InvalidArgument, "window spec needs 0 < hop <= window length");
  }
  if (n_samples < w.window_len_samples) {
    fail(ErrorKind::TooShort, "signal has " + std::to_string(n_samples) +
                                  " samples, fewer than one window of " +
                                  std::to_string(w.window_len_samples));
  }
  return Framing{w, (n_samples - w.window_len_samples) / w.hop_samples + 1};
}

Framing frame_signal(const MultichannelSignal& s, WindowSpec w) {
  return frame_length(static_cast<std::size_t>(s.data.rows()), w);
}

}  // namespace nsp
