#include "nsp/eeg_features.hpp"

#include "nsp/errors.hpp"
#include "nsp/spectrum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace nsp {

namespace {

constexpr double kVarianceFloor = 1e-12;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double zero_crossing_rate(std::span<const double> x) {
  int prev = 0;
  std::size_t changes = 0;
  for (double v : x) {
    int s = sign_of(v);
    if (s == 0) s = prev;
    if (s != 0 && prev != 0 && s != prev) ++changes;
    if (s != 0) prev = s;
  }
  return static_cast<double>(changes) / static_cast<double>(x.size() - 1);
}

double spectral_entropy(std::span<const double> x) {
  const auto power = power_spectrum(x, x.size());
  double total = 0.0;
  for (double p : power) total += p;
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double p : power) {
    if (p > 0.0) {
      const double q = p / total;
      h -= q * std::log(q);
    }
  }
  return std::max(h, 0.0);
}

bool iequals(const std::string& a, const std::string& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) ==
           std::tolower(static_cast<unsigned char>(y));
  });
}

}  // namespace

WindowStats window_stats(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n < 2) fail(ErrorKind::TooShort, "window_stats: window needs at least 2 samples");

  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : window) {
    sum += v;
    sum_sq += v * v;
  }
  WindowStats st;
  st.mean = sum * inv_n;
  st.rms = std::sqrt(sum_sq * inv_n);

  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : window) {
    const double d = v - st.mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 *= inv_n;
  m4 *= inv_n;
  st.kurtosis = m2 < kVarianceFloor ? 0.0 : m4 / (m2 * m2);

  st.zcr = zero_crossing_rate(window);
  st.spectral_entropy = spectral_entropy(window);
  return st;
}

FeatureSequence extract_eeg_features(const MultichannelSignal& s, WindowSpec w) {
  validate(s);
  const Framing framing = frame_signal(s, w);
  const Eigen::Index channels = s.n_channels();

  FeatureSequence out;
  out.modality = Modality::Eeg;
  out.rate_hz = w.frame_rate_hz(s.sample_rate_hz);
  out.data.resize(static_cast<Eigen::Index>(framing.count), kEegStatsPerChannel * channels);

  // Column-major storage keeps each channel's window contiguous.
  for (Eigen::Index c = 0; c < channels; ++c) {
    const double* column = s.data.col(c).data();
    for (std::size_t t = 0; t < framing.count; ++t) {
      const std::span<const double> win(column + framing.offset(t), w.window_len_samples);
      const WindowStats st = window_stats(win);
      const auto row = static_cast<Eigen::Index>(t);
      const Eigen::Index base = kEegStatsPerChannel * c;
      out.data(row, base + 0) = st.rms;
      out.data(row, base + 1) = st.zcr;
      out.data(row, base + 2) = st.mean;
      out.data(row, base + 3) = st.kurtosis;
      out.data(row, base + 4) = st.spectral_entropy;
    }
  }
  return out;
}

MultichannelSignal select_channels(const MultichannelSignal& s,
                                   std::span<const std::string> labels,
                                   std::span<const std::string> wanted) {
  if (static_cast<Eigen::Index>(labels.size()) != s.n_channels()) {
    fail(ErrorKind::ShapeMismatch, "select_channels: " + std::to_string(labels.size()) +
                                       " labels for " + std::to_string(s.n_channels()) +
                                       " channels");
  }
  MultichannelSignal out;
  out.sample_rate_hz = s.sample_rate_hz;
  out.data.resize(s.n_samples(), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t j = 0; j < wanted.size(); ++j) {
    const auto it = std::find_if(labels.begin(), labels.end(),
                                 [&](const std::string& l) { return iequals(l, wanted[j]); });
    if (it == labels.end()) {
      fail(ErrorKind::UnknownChannel, "unknown channel '" + wanted[j] + "'");
    }
    out.data.col(static_cast<Eigen::Index>(j)) = s.data.col(it - labels.begin());
  }
  return out;
}

}  // namespace nsp
