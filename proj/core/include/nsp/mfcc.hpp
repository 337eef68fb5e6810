#pragma once

#include "nsp/feature_sequence.hpp"
#include "nsp/signal.hpp"

#include <Eigen/Dense>

#include <span>

namespace nsp {

struct MfccConfig {
  int n_cepstra = 13;
  double sample_rate_hz = 16000.0;
  double frame_len_ms = 25.0;
  double hop_ms = 10.0;
  int n_mel_filters = 26;
  int fft_size = 512;
  double preemphasis = 0.97;
  double low_hz = 0.0;
  double high_hz = 8000.0;
  double log_floor = 1e-10;
  int delta_window = 2;

  int frame_samples() const;  // 400 at the defaults
  int hop_samples() const;    // 160 at the defaults
};

// Mel scale (HTK form): 2595 log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mel_filters x (fft_size/2 + 1) triangular weights. Triangles are
// evaluated on continuous frequency, with corner points equally spaced in mel
// between low_hz and high_hz.
Eigen::MatrixXd mel_filterbank(const MfccConfig& cfg);

// Center frequency of each mel filter in Hz.
Eigen::VectorXd mel_centers_hz(const MfccConfig& cfg);

// Orthonormal DCT-II and its inverse (DCT-III).
Eigen::VectorXd dct_ortho(const Eigen::VectorXd& x);
Eigen::VectorXd idct_ortho(const Eigen::VectorXd& c);

// Log mel filterbank energies of one frame: preemphasis, Hamming window,
// power spectrum |X|^2 / nfft, mel weights, log with floor.
// Throws ShapeMismatch if the frame is not frame_samples() long.
Eigen::VectorXd log_mel_energies(std::span<const double> frame, const MfccConfig& cfg);

// First n_cepstra coefficients of dct_ortho(log_mel_energies(frame)).
Eigen::VectorXd mfcc(std::span<const double> frame, const MfccConfig& cfg = {});

// Appends regression deltas and delta-deltas: D -> 3D.
//   delta_t = sum_{n=1..N} n (x_{t+n} - x_{t-n}) / (2 sum n^2)
// with indices clamped to [0, T-1]. Throws TooShort when T < 2N + 1.
FeatureSequence add_deltas(const FeatureSequence& f, int delta_window = 2);

// Mono audio -> T x 39 (13 cepstra + deltas + delta-deltas) at 100 Hz.
// Throws InvalidArgument on a sample-rate mismatch or multi-channel input.
FeatureSequence extract_mfcc(const MultichannelSignal& audio, const MfccConfig& cfg = {});

}  // namespace nsp
