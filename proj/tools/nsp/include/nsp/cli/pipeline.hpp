#pragma once

#include "nsp/datakit/container.hpp"
#include "nsp/datakit/manifest.hpp"
#include "nsp/datakit/metrics.hpp"
#include "nsp/datakit/split.hpp"
#include "nsp/reduction.hpp"
#include "nsp/standardizer.hpp"
#include "nsp/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nsp::cli {

// Per-trial EEG and MFCC feature sequences plus the split, as written by
// `nsp features`:
//   features.manifest          dataset tag, condition, vocabulary, channels, trials
//   split.manifest             train/validation/test ids per class
//   eeg/<id>.nspf, mfcc/<id>.nspf
struct FeatureStore {
  struct Trial {
    std::string id;
    int label = 0;
  };

  std::filesystem::path dir;
  std::string dataset_tag;
  datakit::Condition condition = datakit::Condition::Clean;
  std::vector<std::string> vocabulary;
  std::vector<std::string> channels;
  std::uint64_t seed = 0;
  std::vector<Trial> trials;
  datakit::SplitAssignment split;

  Eigen::MatrixXd eeg(const std::string& id) const;
  Eigen::MatrixXd mfcc(const std::string& id) const;
  const Trial& trial(const std::string& id) const;
};

inline constexpr const char* kFeatureManifest = "features.manifest";
inline constexpr const char* kSplitManifest = "split.manifest";

// Filters every trial (bandpass 0.1-70 Hz order 4, 60 Hz notch), keeps the
// requested channels (all when empty), and extracts EEG statistics and
// MFCC-39. Returns the paths it wrote.
std::vector<std::filesystem::path> extract_features(const datakit::Dataset& ds,
                                                    const std::vector<std::string>& channels,
                                                    std::uint64_t seed, int jobs,
                                                    const std::filesystem::path& out_dir);

// Throws MissingArtifact when the directory or its manifests are absent.
FeatureStore load_feature_store(const std::filesystem::path& dir);

enum class ReducerKind { Kpca, Autoencoder };
std::string_view to_string(ReducerKind k);
ReducerKind parse_reducer_kind(std::string_view text);

struct ReducerOptions {
  ReducerKind kind = ReducerKind::Kpca;
  int components = 39;       // KPCA only; the autoencoder code size is 6
  int degree = 3;
  int fit_rows = 1000;       // cap on training frames used for the fit
  int autoencoder_epochs = 500;
  std::uint64_t seed = 42;
};

// Fits the reducer on (a seeded subsample of) the training-split EEG frames.
Reducer fit_reducer(const FeatureStore& store, const ReducerOptions& opts);

void pack_reducer(datakit::ModelContainer& c, const std::string& prefix, const Reducer& r);
Reducer unpack_reducer(const datakit::ModelContainer& c, const std::string& prefix);

// Input assembly for a feature mode. EEG and FUSED inputs go through the
// reducer when one is given; FUSED truncates to the shorter stream.
// STUDENT uses MFCC inputs.
Eigen::MatrixXd model_input(const FeatureStore& store, const std::string& id,
                            datakit::FeatureMode mode, const Reducer* reducer);

struct Splits {
  Split train, validation, test;
};

// Builds all three splits for a mode; when `standardizer` is empty it is
// fitted on the training frames. Inputs are standardized in place.
Splits build_splits(const FeatureStore& store, datakit::FeatureMode mode, const Reducer* reducer,
                    std::optional<Standardizer>& standardizer);

// Single-channel EEG statistics (columns 5c .. 5c+4) for ablation.
Splits build_channel_splits(const FeatureStore& store, int channel);

// A trained classifier with everything needed to rebuild its inputs.
struct Classifier {
  datakit::FeatureMode mode = datakit::FeatureMode::Mfcc;
  ModelParams params;
  Standardizer input;
  std::optional<Reducer> reducer;
};

inline constexpr const char* kClassifierKind = "nsp-classifier";
inline constexpr const char* kReducerKind = "nsp-reducer";

datakit::ModelContainer pack_classifier(const Classifier& c);
Classifier unpack_classifier(const datakit::ModelContainer& c);

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

// Round-trip decimal text for doubles used in records and CSVs.
std::string format_double(double v);

}  // namespace nsp::cli
