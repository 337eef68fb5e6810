#pragma once

#include "nsp/feature_sequence.hpp"
#include "nsp/signal.hpp"

#include <span>
#include <string>
#include <vector>

namespace nsp {

inline constexpr int kEegStatsPerChannel = 5;

// Per-window statistics, in the order they appear in feature vectors.
struct WindowStats {
  double rms = 0.0;
  double zcr = 0.0;
  double mean = 0.0;
  double kurtosis = 0.0;
  double spectral_entropy = 0.0;
};

// rms      sqrt(mean(x^2))
// zcr      strict sign changes / (n - 1); zeros carry the previous sign
// mean     arithmetic mean of the window
// kurtosis m4 / m2^2 (Pearson, non-excess); 0 when m2 < 1e-12
// entropy  natural-log Shannon entropy of the one-sided raw periodogram
//          normalized to sum 1; 0 for an all-zero window
// Throws TooShort for windows shorter than 2 samples.
WindowStats window_stats(std::span<const double> window);

// T x (5 * channels) features, channel-major: for channel c the columns
// 5c .. 5c+4 hold (rms, zcr, mean, kurtosis, entropy). The signal is
// expected to be filtered already.
FeatureSequence extract_eeg_features(const MultichannelSignal& s, WindowSpec w = kEegWindow);

// Column subset of `s` in the order of `wanted`. `labels` names the columns
// of `s`; matching is case-insensitive so "Fc5" finds "FC5".
// Throws UnknownChannel naming the first label not found.
MultichannelSignal select_channels(const MultichannelSignal& s,
                                   std::span<const std::string> labels,
                                   std::span<const std::string> wanted);

}  // namespace nsp
