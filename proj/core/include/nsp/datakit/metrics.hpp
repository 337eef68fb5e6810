#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nsp::datakit {

enum class FeatureMode { Mfcc, Eeg, Fused, Student };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view text);

struct MetricsRecord {
  std::string experiment_id;
  FeatureMode feature_mode = FeatureMode::Mfcc;
  std::string dataset_tag;
  std::string condition;  // "clean" / "noisy"
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::map<std::string, std::string> config;  // flat snapshot of the run settings

  std::string to_json() const;
  static MetricsRecord from_json(std::string_view text);
};

void write_record(const std::filesystem::path& path, const MetricsRecord& r);
MetricsRecord read_record(const std::filesystem::path& path);

// Every *.json file under `dir` (recursively) that parses as a metrics
// record, ordered by relative path.
std::vector<MetricsRecord> collect_records(const std::filesystem::path& dir);

// Dataset x condition rows, one column per feature mode present, in the
// fixed order MFCC, FUSED, EEG, STUDENT. Each row flags its best column.
struct AccuracyTable {
  struct Row {
    std::string dataset_tag;
    std::string condition;
    std::vector<std::optional<double>> cells;
    std::optional<std::size_t> best;
  };
  std::vector<FeatureMode> columns;
  std::vector<Row> rows;

  bool empty() const { return rows.empty(); }
  // Markdown rendering; accuracies in percent with two decimals, the best
  // cell of each row in bold.
  std::string to_markdown(std::string_view title = {}) const;
};

// Uses test accuracy. When several records share a row and mode, the last
// one wins.
AccuracyTable accuracy_table(const std::vector<MetricsRecord>& records);

}  // namespace nsp::datakit
