#include "nsp/cli/cli.hpp"
#include "nsp/cli/pipeline.hpp"
#include "nsp/datakit/manifest.hpp"
#include "nsp/datakit/metrics.hpp"
#include "nsp/datakit/nspf.hpp"
#include "nsp/datakit/split.hpp"
#include "scratch_dir.hpp"
#include "tree_digest.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nsp;
using nsp::testing::ScratchDir;
using nsp::testing::tree_digest;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run_cli(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

int line_count(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

// Small two-class dataset shared by the tests below: 6 trials per class.
const std::vector<std::string> kTiny{"--classes", "2", "--per-class", "6", "--eeg-channels", "8"};

std::vector<std::string> with(std::vector<std::string> base, const std::vector<std::string>& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

const std::vector<std::string> kQuick{"--epochs", "3", "--hidden", "4", "--dense", "3"};

}  // namespace

TEST_CASE("synth writes a dataset and rejects bad counts", "[cli]") {
  ScratchDir dir("cli-synth");
  const auto bad = run({"synth", "--out", (dir / "bad").string(), "--per-class", "0"});
  CHECK(bad.code == cli::kExitConfig);
  CHECK_FALSE(bad.err.empty());

  const auto ok = run({"synth", "--out", (dir / "d").string(), "--seed", "3"});
  REQUIRE(ok.code == cli::kExitOk);
  const auto ds = datakit::load_dataset(dir / "d");
  CHECK(ds.trials.size() == 200);

  CHECK(run({"synth"}).code == cli::kExitConfig);
  CHECK(run({"bogus"}).code == cli::kExitConfig);
}

TEST_CASE("features exit codes and channel selection", "[cli]") {
  ScratchDir dir("cli-features");
  CHECK(run({"features", "--data", (dir / "missing").string(), "--out", (dir / "f").string()}).code ==
        cli::kExitBadDataset);

  REQUIRE(run(with({"synth", "--out", (dir / "d").string(), "--classes", "2", "--per-class", "6"}, {})).code == 0);
  REQUIRE(run({"features", "--data", (dir / "d").string(), "--out", (dir / "all").string()}).code == 0);
  REQUIRE(run({"features", "--data", (dir / "d").string(), "--out", (dir / "four").string(), "--channels",
               "T7,T8,Fc5,P7"})
              .code == 0);

  const auto all = cli::load_feature_store(dir / "all");
  const auto four = cli::load_feature_store(dir / "four");
  REQUIRE(all.trials.size() == 12);
  const std::string id = all.trials.front().id;
  CHECK(all.eeg(id).cols() == 155);
  CHECK(four.eeg(id).cols() == 20);
  CHECK(four.channels == std::vector<std::string>{"T7", "T8", "FC5", "P7"});
  CHECK(all.mfcc(id).cols() == 39);
  std::size_t assigned = 0;
  for (auto part : {datakit::SplitPart::Train, datakit::SplitPart::Validation, datakit::SplitPart::Test}) {
    assigned += all.split.ids(part).size();
  }
  CHECK(assigned == 12);

  CHECK(run({"features", "--data", (dir / "d").string(), "--out", (dir / "x").string(), "--channels", "Q9"}).code ==
        cli::kExitConfig);
}

TEST_CASE("train, eval, distill, sweep, ablate and report", "[cli]") {
  ScratchDir dir("cli-flow");
  const auto d = (dir / "d").string(), f = (dir / "f").string();
  REQUIRE(run(with({"synth", "--out", d}, kTiny)).code == 0);
  REQUIRE(run({"features", "--data", d, "--out", f}).code == 0);

  CHECK(run(with({"distill", "--features", f, "--teacher", (dir / "none").string(), "--out",
                  (dir / "s").string()},
                 kQuick))
            .code == cli::kExitMissingArtifact);
  CHECK(run(with({"train", "--features", (dir / "nofeat").string(), "--out", (dir / "m").string()}, kQuick)).code ==
        cli::kExitMissingArtifact);
  CHECK(run(with({"train", "--features", f, "--out", (dir / "m").string(), "--mode", "student"}, kQuick)).code ==
        cli::kExitConfig);

  REQUIRE(run({"reduce", "--features", f, "--out", (dir / "r").string(), "--components", "5"}).code == 0);
  const auto curve = datakit::read_text_file(dir / "r" / "explained_variance.csv");
  // One row per kernel eigenvalue, cumulative, ending at 1.
  CHECK(curve.rfind("components,cumulative_explained_variance\n", 0) == 0);
  const auto last = curve.substr(curve.rfind(',', curve.size() - 2) + 1);
  CHECK(std::stod(last) == Catch::Approx(1.0).margin(1e-9));

  const auto eeg = run(with({"train", "--features", f, "--out", (dir / "eeg").string(), "--mode", "eeg"}, kQuick));
  REQUIRE(eeg.code == 0);
  CHECK(line_count(datakit::read_text_file(dir / "eeg" / "history.csv")) == 1 + 3);
  REQUIRE(run({"eval", "--model", (dir / "eeg").string(), "--features", f}).code == 0);
  const auto rec = datakit::read_record(dir / "eeg" / "eval.json");
  CHECK(rec.feature_mode == datakit::FeatureMode::Eeg);
  CHECK(rec.test_accuracy == datakit::read_record(dir / "eeg" / "metrics.json").test_accuracy);

  const auto teacher = (dir / "teacher").string();
  REQUIRE(run(with({"train", "--features", f, "--out", teacher, "--mode", "fused", "--reducer",
                    (dir / "r").string(), "--pooling", "last"},
                   kQuick))
              .code == 0);
  CHECK(run(with({"distill", "--features", f, "--teacher", (dir / "eeg").string(), "--out",
                  (dir / "bad").string()},
                 kQuick))
            .code == cli::kExitConfig);
  const auto student = run(with({"distill", "--features", f, "--teacher", teacher, "--out", (dir / "s").string(),
                                 "--temperature", "2", "--lambda", "0.2"},
                                kQuick));
  REQUIRE(student.code == 0);
  const auto srec = datakit::read_record(dir / "s" / "metrics.json");
  CHECK(srec.feature_mode == datakit::FeatureMode::Student);
  CHECK(srec.config.at("lambda") == "0.2");
  CHECK(run(with({"distill", "--features", f, "--teacher", teacher, "--out", (dir / "s2").string(), "--lambda", "2"},
                 kQuick))
            .code == cli::kExitConfig);

  REQUIRE(run(with({"sweep", "--features", f, "--teacher", teacher, "--out", (dir / "sweep").string()}, kQuick))
              .code == 0);
  CHECK(datakit::collect_records(dir / "sweep" / "cells").size() == 16);
  CHECK(line_count(datakit::read_text_file(dir / "sweep" / "sweep.csv")) == 17);
  CHECK(datakit::read_record(dir / "sweep" / "best.json").experiment_id == "sweep/best");

  REQUIRE(run(with({"ablate", "--features", f, "--out", (dir / "ab").string()}, kQuick)).code == 0);
  CHECK(line_count(datakit::read_text_file(dir / "ab" / "ablation.csv")) == 1 + 8);

  const auto report = run({"report", "--records", dir.path().string(), "--out", (dir / "report").string()});
  REQUIRE(report.code == 0);
  const auto md = datakit::read_text_file(dir / "report" / "report.md");
  CHECK(md.find("EEG") != std::string::npos);
  CHECK(md.find("STUDENT") != std::string::npos);
}

TEST_CASE("report over an empty directory", "[cli]") {
  ScratchDir dir("cli-report");
  fs::create_directories(dir / "empty");
  const auto r = run({"report", "--records", (dir / "empty").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(datakit::read_text_file(dir / "out" / "report.md").empty());
}

TEST_CASE("repeated commands give content-identical outputs", "[cli]") {
  ScratchDir dir("cli-determinism");
  auto stage = [&](const std::string& tag) {
    const auto root = dir / tag;
    const auto d = (root / "d").string(), f = (root / "f").string();
    REQUIRE(run(with({"synth", "--out", d, "--seed", "9"}, kTiny)).code == 0);
    REQUIRE(run({"features", "--data", d, "--out", f, "--seed", "9", "--jobs", tag == "a" ? "1" : "2"}).code == 0);
    REQUIRE(run({"reduce", "--features", f, "--out", (root / "r").string(), "--seed", "9", "--components", "5"}).code == 0);
    REQUIRE(run(with({"train", "--features", f, "--out", (root / "m").string(), "--mode", "mfcc", "--seed", "9"},
                     kQuick))
                .code == 0);
    return root;
  };
  const auto a = stage("a");
  const auto b = stage("b");
  for (const char* sub : {"d", "f", "r", "m"}) {
    INFO(sub);
    CHECK(tree_digest(a / sub) == tree_digest(b / sub));
  }
  // A different seed changes the data.
  REQUIRE(run(with({"synth", "--out", (dir / "c").string(), "--seed", "10"}, kTiny)).code == 0);
  CHECK(tree_digest(dir / "c") != tree_digest(a / "d"));
}
