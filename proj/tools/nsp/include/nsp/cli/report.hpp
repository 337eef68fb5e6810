#pragma once

#include "nsp/distill.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nsp::cli {

struct ChannelScore {
  int index = 0;
  std::string channel;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Descending test accuracy; ties broken by validation accuracy, then by
// channel index.
void rank_channels(std::vector<ChannelScore>& scores);
std::string ablation_csv(const std::vector<ChannelScore>& ranked);
std::string ablation_markdown(const std::vector<ChannelScore>& ranked);

std::string sweep_markdown(const SweepResult& res);

// Scans `records_dir` recursively for metrics records, sweep tables,
// training histories, explained-variance curves and ablation results, and
// writes report.md plus plot-ready CSVs under `out_dir`/series. Returns the
// written paths; with nothing to report, report.md is empty.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& records_dir,
                                                const std::filesystem::path& out_dir);

}  // namespace nsp::cli
