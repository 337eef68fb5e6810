#include "nsp/datakit/metrics.hpp"

#include "nsp/datakit/nspf.hpp"
#include "nsp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace nsp::datakit {

using nlohmann::json;

std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::Mfcc: return "MFCC";
    case FeatureMode::Eeg: return "EEG";
    case FeatureMode::Fused: return "FUSED";
    case FeatureMode::Student: return "STUDENT";
  }
  return "?";
}

FeatureMode parse_feature_mode(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "MFCC") return FeatureMode::Mfcc;
  if (up == "EEG") return FeatureMode::Eeg;
  if (up == "FUSED") return FeatureMode::Fused;
  if (up == "STUDENT") return FeatureMode::Student;
  fail(ErrorKind::InvalidArgument, "unknown feature mode '" + std::string(text) + "'");
}

std::string MetricsRecord::to_json() const {
  json j;
  j["kind"] = "nsp-metrics";
  j["experiment_id"] = experiment_id;
  j["feature_mode"] = std::string(to_string(feature_mode));
  j["dataset_tag"] = dataset_tag;
  j["condition"] = condition;
  j["train_accuracy"] = train_accuracy;
  j["val_accuracy"] = val_accuracy;
  j["test_accuracy"] = test_accuracy;
  j["config"] = config;
  return j.dump(2) + "\n";
}

MetricsRecord MetricsRecord::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("kind", "") != "nsp-metrics") {
      fail(ErrorKind::InvalidArgument, "not a metrics record");
    }
    MetricsRecord r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.feature_mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
    r.dataset_tag = j.at("dataset_tag").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.train_accuracy = j.at("train_accuracy").get<double>();
    r.val_accuracy = j.at("val_accuracy").get<double>();
    r.test_accuracy = j.at("test_accuracy").get<double>();
    r.config = j.value("config", std::map<std::string, std::string>{});
    for (double a : {r.train_accuracy, r.val_accuracy, r.test_accuracy}) {
      if (!(a >= 0.0 && a <= 1.0)) fail(ErrorKind::InvalidArgument, "accuracy outside [0, 1]");
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed metrics record: ") + e.what());
  }
}

void write_record(const std::filesystem::path& path, const MetricsRecord& r) {
  write_text_file(path, r.to_json());
}

MetricsRecord read_record(const std::filesystem::path& path) {
  return MetricsRecord::from_json(read_text_file(path));
}

std::vector<MetricsRecord> collect_records(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  if (!std::filesystem::is_directory(dir)) return {};
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<MetricsRecord> out;
  for (const auto& p : paths) {
    try {
      out.push_back(read_record(p));
    } catch (const Error&) {
      // Other JSON artifacts (model containers) live alongside records.
    }
  }
  return out;
}

AccuracyTable accuracy_table(const std::vector<MetricsRecord>& records) {
  static constexpr FeatureMode kOrder[] = {FeatureMode::Mfcc, FeatureMode::Fused, FeatureMode::Eeg,
                                           FeatureMode::Student};
  AccuracyTable t;
  for (FeatureMode m : kOrder) {
    if (std::any_of(records.begin(), records.end(), [&](const auto& r) { return r.feature_mode == m; })) {
      t.columns.push_back(m);
    }
  }
  for (const auto& r : records) {
    auto row = std::find_if(t.rows.begin(), t.rows.end(), [&](const AccuracyTable::Row& x) {
      return x.dataset_tag == r.dataset_tag && x.condition == r.condition;
    });
    if (row == t.rows.end()) {
      t.rows.push_back({r.dataset_tag, r.condition, std::vector<std::optional<double>>(t.columns.size()), {}});
      row = t.rows.end() - 1;
    }
    const auto col = std::find(t.columns.begin(), t.columns.end(), r.feature_mode) - t.columns.begin();
    row->cells[static_cast<std::size_t>(col)] = r.test_accuracy;
  }
  for (auto& row : t.rows) {
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      if (row.cells[c] && (!row.best || *row.cells[c] > *row.cells[*row.best])) row.best = c;
    }
  }
  return t;
}

std::string AccuracyTable::to_markdown(std::string_view title) const {
  if (rows.empty()) return {};
  std::string out;
  if (!title.empty()) {
    out += "## ";
    out += title;
    out += "\n\n";
  }
  out += "| Dataset | Condition |";
  for (FeatureMode m : columns) {
    out += ' ';
    out += to_string(m);
    out += " acc |";
  }
  out += "\n|---|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += '\n';
  for (const auto& row : rows) {
    out += "| " + row.dataset_tag + " | " + row.condition + " |";
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      if (!row.cells[c]) {
        out += " - |";
        continue;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *row.cells[c]);
      const bool best = row.best && *row.best == c;
      out += best ? std::string(" **") + buf + "** |" : std::string(" ") + buf + " |";
    }
    out += '\n';
  }
  return out;
}

}  // namespace nsp::datakit
