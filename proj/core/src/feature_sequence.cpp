#include "nsp/feature_sequence.hpp"

#include "nsp/errors.hpp"

#include <algorithm>

namespace nsp {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Eeg: return "EEG";
    case Modality::Mfcc: return "MFCC";
    case Modality::Fused: return "FUSED";
  }
  return "?";
}

Modality parse_modality(std::string_view name) {
  if (name == "EEG" || name == "eeg") return Modality::Eeg;
  if (name == "MFCC" || name == "mfcc") return Modality::Mfcc;
  if (name == "FUSED" || name == "fused") return Modality::Fused;
  fail(ErrorKind::InvalidArgument, "unknown modality '" + std::string(name) + "'");
}

void validate(const FeatureSequence& f) {
  if (f.data.rows() < 1 || f.data.cols() < 1) {
    fail(ErrorKind::ShapeMismatch, "feature sequence must be at least 1 x 1");
  }
  if (!f.data.allFinite()) fail(ErrorKind::NonFinite, "feature sequence has non-finite values");
}

FeatureSequence fuse(const FeatureSequence& eeg, const FeatureSequence& mfcc) {
  validate(eeg);
  validate(mfcc);
  const Eigen::Index t = std::min(eeg.frames(), mfcc.frames());
  FeatureSequence out;
  out.modality = Modality::Fused;
  out.rate_hz = eeg.rate_hz;
  out.data.resize(t, eeg.dim() + mfcc.dim());
  out.data.leftCols(eeg.dim()) = eeg.data.topRows(t);
  out.data.rightCols(mfcc.dim()) = mfcc.data.topRows(t);
  return out;
}

}  // namespace nsp
