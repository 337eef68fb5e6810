#pragma once

#include "nsp/signal.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nsp::datakit {

// Ordered "key: value" text document. Lines starting with '#' and blank
// lines are ignored; keys are unique.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text);
  static KeyValueDoc load(const std::filesystem::path& path);

  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  void set(std::string key, std::string value);
  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  // Throw InvalidArgument naming the key if it is missing or malformed.
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::string join_list(const std::vector<std::string>& items, char sep = ',');

enum class Condition { Clean, Noisy };
std::string_view to_string(Condition c);
Condition parse_condition(std::string_view text);

struct TrialManifest {
  std::string id;
  std::string label;
  Condition condition = Condition::Clean;
  std::string eeg_path;    // relative to the dataset directory
  std::string audio_path;  // relative to the dataset directory
  std::vector<std::string> channels;
  double eeg_rate_hz = 1000.0;
  double audio_rate_hz = 16000.0;

  KeyValueDoc to_doc() const;
  static TrialManifest from_doc(const KeyValueDoc& doc);
};

struct TrialSignals {
  MultichannelSignal eeg;
  MultichannelSignal audio;
};

// Reads both matrices of a trial. Throws CorruptFileError on malformed
// files, ShapeMismatch when the EEG column count differs from the channel
// list or the audio is not a single column.
TrialSignals load_trial(const std::filesystem::path& dataset_dir, const TrialManifest& m);
void save_trial(const std::filesystem::path& dataset_dir, const TrialManifest& m,
                const TrialSignals& s);

// Dataset-level index: vocabulary (class order defines label indices),
// condition, tag, and the ordered list of trial ids.
struct DatasetManifest {
  std::string tag = "words";
  Condition condition = Condition::Clean;
  std::vector<std::string> vocabulary;
  std::vector<std::string> trial_ids;
  std::vector<std::pair<std::string, std::string>> extra;  // generator settings, informational

  int label_index(std::string_view label) const;

  KeyValueDoc to_doc() const;
  static DatasetManifest from_doc(const KeyValueDoc& doc);
};

inline constexpr std::string_view kDatasetManifestName = "dataset.manifest";

std::filesystem::path trial_manifest_path(const std::filesystem::path& dataset_dir,
                                          std::string_view id);

struct Dataset {
  std::filesystem::path dir;
  DatasetManifest info;
  std::vector<TrialManifest> trials;
};

// Throws MissingArtifact if the directory or manifest is absent.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace nsp::datakit
