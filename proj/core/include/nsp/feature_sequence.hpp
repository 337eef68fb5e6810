#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace nsp {

enum class Modality { Eeg, Mfcc, Fused };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

// Time-major feature matrix (T x D) at the shared 100 Hz frame rate.
struct FeatureSequence {
  Eigen::MatrixXd data;
  double rate_hz = 100.0;
  Modality modality = Modality::Eeg;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

// Throws ShapeMismatch (T < 1 or D < 1) or NonFinite.
void validate(const FeatureSequence& f);

// Frame-wise concatenation [eeg | mfcc], truncated to the shorter sequence.
FeatureSequence fuse(const FeatureSequence& eeg, const FeatureSequence& mfcc);

}  // namespace nsp
