#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace nsp {

// Raw multichannel time series, samples in rows and channels in columns.
// Holds EEG (1000 Hz, 31 channels) as well as mono audio (16 kHz, 1 column).
struct MultichannelSignal {
  Eigen::MatrixXd data;
  double sample_rate_hz = 0.0;

  Eigen::Index n_samples() const { return data.rows(); }
  Eigen::Index n_channels() const { return data.cols(); }
};

// Throws ShapeMismatch / InvalidArgument / NonFinite if the invariants
// (at least one sample and channel, positive rate, finite values) fail.
void validate(const MultichannelSignal& s);

// Normalized second-order section (a0 == 1):
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct Biquad {
  double b0 = 1.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

// Cascade of second-order sections.
struct IirFilter {
  std::vector<Biquad> sections;

  // Magnitude of the largest pole over all sections.
  double max_pole_radius() const;

  // H(e^{j 2 pi f / fs}) evaluated directly from the coefficients.
  std::complex<double> response(double freq_hz, double fs_hz) const;
  double gain(double freq_hz, double fs_hz) const;
};

IirFilter identity_filter();

// Butterworth bandpass of total order `order` (even), realized as order/2
// biquads via the bilinear transform with prewarped band edges. Unity gain
// at the geometric band center.
IirFilter design_bandpass(double low_hz, double high_hz, int order, double fs_hz);

// Single-biquad notch with quality factor `quality`. Unity gain at DC.
IirFilter design_notch(double center_hz, double fs_hz, double quality = 30.0);

// Causal per-channel filtering (direct form II transposed), starting from
// zero state. Output has the same shape and rate as the input.
MultichannelSignal apply_filter(const IirFilter& f, const MultichannelSignal& s);

struct WindowSpec {
  std::size_t window_len_samples = 100;
  std::size_t hop_samples = 10;

  double frame_rate_hz(double sample_rate_hz) const {
    return sample_rate_hz / static_cast<double>(hop_samples);
  }
};

// 100 ms / 10 ms at 1000 Hz, i.e. a 100 Hz feature rate.
inline constexpr WindowSpec kEegWindow{100, 10};

// Frame layout over a signal. Frames are views; use `window` to fetch one.
struct Framing {
  WindowSpec spec;
  std::size_t count = 0;

  std::size_t offset(std::size_t i) const { return i * spec.hop_samples; }
};

// count = floor((n_samples - window_len) / hop) + 1.
// Throws TooShort if the signal holds fewer samples than one window.
Framing frame_signal(const MultichannelSignal& s, WindowSpec w);
Framing frame_length(std::size_t n_samples, WindowSpec w);

inline auto window(const MultichannelSignal& s, const Framing& f, std::size_t i) {
  return s.data.middleRows(static_cast<Eigen::Index>(f.offset(i)),
                           static_cast<Eigen::Index>(f.spec.window_len_samples));
}

}  // namespace nsp
