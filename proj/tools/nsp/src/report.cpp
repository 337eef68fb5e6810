#include "nsp/cli/report.hpp"

#include "nsp/cli/pipeline.hpp"
#include "nsp/datakit/metrics.hpp"
#include "nsp/datakit/nspf.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace nsp::cli {

namespace fs = std::filesystem;
using datakit::FeatureMode;

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(datakit::read_text_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(datakit::split_list(line));
  }
  return rows;
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& r : rows) out += datakit::join_list(r) + '\n';
  return out;
}

// Keeps the named columns of a CSV (header row included), in the given order.
std::vector<std::vector<std::string>> select_columns(const std::vector<std::vector<std::string>>& rows,
                                                     const std::vector<std::string>& names) {
  if (rows.empty()) return {};
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    const auto it = std::find(rows.front().begin(), rows.front().end(), n);
    if (it == rows.front().end()) return {};
    idx.push_back(static_cast<std::size_t>(it - rows.front().begin()));
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    std::vector<std::string> sel;
    for (std::size_t i : idx) sel.push_back(i < r.size() ? r[i] : "");
    out.push_back(std::move(sel));
  }
  return out;
}

std::string slug(const fs::path& rel_dir) {
  std::string s = rel_dir.generic_string();
  if (s.empty() || s == ".") return "root";
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

std::vector<fs::path> find_named(const fs::path& root, const std::string& name) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == name) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void rank_channels(std::vector<ChannelScore>& scores) {
  std::stable_sort(scores.begin(), scores.end(), [](const ChannelScore& a, const ChannelScore& b) {
    if (a.test_accuracy != b.test_accuracy) return a.test_accuracy > b.test_accuracy;
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    return a.index < b.index;
  });
}

std::string ablation_csv(const std::vector<ChannelScore>& ranked) {
  std::string out = "rank,channel,index,train_accuracy,val_accuracy,test_accuracy\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& s = ranked[i];
    out += std::to_string(i + 1) + ',' + s.channel + ',' + std::to_string(s.index) + ',' +
           format_double(s.train_accuracy) + ',' + format_double(s.val_accuracy) + ',' +
           format_double(s.test_accuracy) + '\n';
  }
  return out;
}

std::string ablation_markdown(const std::vector<ChannelScore>& ranked) {
  std::string out = "| Rank | Channel | Test acc (EEG only) |\n|---|---|---|\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out += "| " + std::to_string(i + 1) + " | " + ranked[i].channel + " | " + percent(ranked[i].test_accuracy) + " |\n";
  }
  return out;
}

std::string sweep_markdown(const SweepResult& res) {
  std::string out = "| Temperature | Lambda | Train acc | Val acc | Test acc |\n|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    const auto& c = res.cells[i];
    const std::string mark = i == res.best ? "**" : "";
    out += "| " + format_double(c.config.temperature) + " | " + format_double(c.config.lambda) + " | " +
           percent(c.train_accuracy) + " | " + mark + percent(c.val_accuracy) + mark + " | " +
           percent(c.test_accuracy) + " |\n";
  }
  return out;
}

std::vector<fs::path> write_report(const fs::path& records_dir, const fs::path& out_dir) {
  if (!fs::is_directory(records_dir)) {
    fail(ErrorKind::MissingArtifact, "records directory " + records_dir.string() + " does not exist");
  }
  std::vector<fs::path> written;
  std::string md;

  std::vector<datakit::MetricsRecord> fusion, distill;
  for (auto& r : datakit::collect_records(records_dir)) {
    if (r.experiment_id.rfind("sweep/", 0) == 0) continue;
    if (r.feature_mode != FeatureMode::Student) fusion.push_back(r);
    if (r.feature_mode == FeatureMode::Student || r.feature_mode == FeatureMode::Mfcc) distill.push_back(r);
  }
  const auto fusion_table = datakit::accuracy_table(fusion);
  if (!fusion_table.empty()) md += fusion_table.to_markdown("Test accuracy by feature set") + '\n';
  const bool has_student = std::any_of(distill.begin(), distill.end(),
                                       [](const auto& r) { return r.feature_mode == FeatureMode::Student; });
  if (has_student) md += datakit::accuracy_table(distill).to_markdown("Distillation: student vs MFCC") + '\n';

  std::vector<std::pair<fs::path, std::string>> series;
  for (const auto& p : find_named(records_dir, "sweep.csv")) {
    const auto rows = read_csv(p);
    const auto rel = fs::relative(p.parent_path(), records_dir);
    md += "## Sweep " + slug(rel) + "\n\n| Temperature | Lambda | Train acc | Val acc | Test acc |\n|---|---|---|---|---|\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 6) continue;
      const std::string mark = r[5] == "1" ? "**" : "";
      md += "| " + r[0] + " | " + r[1] + " | " + percent(std::stod(r[2])) + " | " + mark + percent(std::stod(r[3])) +
            mark + " | " + percent(std::stod(r[4])) + " |\n";
    }
    md += '\n';
  }
  for (const auto& p : find_named(records_dir, "history.csv")) {
    const auto rel = fs::relative(p.parent_path(), records_dir);
    const auto rows = select_columns(read_csv(p), {"epoch", "train_accuracy", "val_accuracy"});
    if (!rows.empty()) series.emplace_back(fs::path("series") / ("accuracy_" + slug(rel) + ".csv"), csv_text(rows));
  }
  for (const auto& p : find_named(records_dir, "explained_variance.csv")) {
    const auto rel = fs::relative(p.parent_path(), records_dir);
    series.emplace_back(fs::path("series") / ("explained_variance_" + slug(rel) + ".csv"), datakit::read_text_file(p));
  }
  for (const auto& p : find_named(records_dir, "ablation.csv")) {
    const auto rel = fs::relative(p.parent_path(), records_dir);
    const auto rows = select_columns(read_csv(p), {"channel", "test_accuracy"});
    if (rows.empty()) continue;
    series.emplace_back(fs::path("series") / ("channels_" + slug(rel) + ".csv"), csv_text(rows));
    md += "## Per-channel EEG accuracy " + slug(rel) + "\n\n| Channel | Test acc |\n|---|---|\n";
    for (std::size_t i = 1; i < rows.size(); ++i) md += "| " + rows[i][0] + " | " + percent(std::stod(rows[i][1])) + " |\n";
    md += '\n';
  }

  datakit::write_text_file(out_dir / "report.md", md);
  written.push_back(out_dir / "report.md");
  for (const auto& [rel, text] : series) {
    datakit::write_text_file(out_dir / rel, text);
    written.push_back(out_dir / rel);
  }
  return written;
}

}  // namespace nsp::cli
