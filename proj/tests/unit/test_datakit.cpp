#include "nsp/datakit/channels.hpp"
#include "nsp/datakit/container.hpp"
#include "nsp/datakit/manifest.hpp"
#include "nsp/datakit/metrics.hpp"
#include "nsp/datakit/nspf.hpp"
#include "nsp/datakit/split.hpp"
#include "nsp/datakit/synth.hpp"
#include "nsp/eeg_features.hpp"
#include "nsp/errors.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace nsp;
using namespace nsp::datakit;
using Catch::Matchers::WithinAbs;
using nsp::testing::ScratchDir;

namespace {

std::vector<ClassTrials> classes_of(const std::vector<std::size_t>& sizes) {
  std::vector<ClassTrials> out;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    ClassTrials ct{"c" + std::to_string(c), {}};
    for (std::size_t i = 0; i < sizes[c]; ++i) ct.ids.push_back("c" + std::to_string(c) + "_" + std::to_string(i));
    out.push_back(ct);
  }
  return out;
}

// Random matrix of float-representable values.
Eigen::MatrixXd float_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Eigen::MatrixXd m = oracle::random_matrix(r, c, seed);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(m.data()[i]);
  return m;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

SyntheticSpec tiny_spec() {
  SyntheticSpec spec;
  spec.n_classes = 2;
  spec.trials_per_class = 4;
  spec.eeg_channels = 4;
  spec.duration_s = 0.5;
  return spec;
}

}  // namespace

TEST_CASE("split rule reproduces the reference class sizes", "[datakit]") {
  struct Row {
    std::size_t n, train, val, test;
  };
  const std::vector<Row> table{{305, 195, 49, 61}, {406, 259, 66, 81}, {343, 219, 56, 68},
                               {335, 214, 54, 67}, {267, 170, 44, 53}};
  for (const auto& r : table) {
    const auto c = split_counts(r.n);
    INFO("N = " << r.n);
    CHECK(c.train == r.train);
    CHECK(c.validation == r.val);
    CHECK(c.test == r.test);
  }

  std::vector<std::size_t> sizes;
  for (const auto& r : table) sizes.push_back(r.n);
  const auto split = split_dataset(classes_of(sizes), 42);
  REQUIRE(split.classes.size() == 5);
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(split.classes[c].train.size() == table[c].train);
    CHECK(split.classes[c].validation.size() == table[c].val);
    CHECK(split.classes[c].test.size() == table[c].test);
  }
}

TEST_CASE("splits partition every class", "[datakit]") {
  const auto by_class = classes_of({5, 17, 50, 101});
  const auto a = split_dataset(by_class, 7);
  std::set<std::string> seen;
  std::size_t total = 0;
  for (SplitPart part : {SplitPart::Train, SplitPart::Validation, SplitPart::Test}) {
    for (const auto& id : a.ids(part)) {
      CHECK(seen.insert(id).second);
      CHECK(a.part_of(id) == part);
      ++total;
    }
  }
  CHECK(total == 5 + 17 + 50 + 101);
  const auto b = split_dataset(by_class, 7);
  CHECK(a.ids(SplitPart::Test) == b.ids(SplitPart::Test));
  const auto c = split_dataset(by_class, 8);
  CHECK(a.ids(SplitPart::Test) != c.ids(SplitPart::Test));

  const auto round = SplitAssignment::from_doc(KeyValueDoc::parse(a.to_doc().to_text()));
  CHECK(round.ids(SplitPart::Train) == a.ids(SplitPart::Train));
  CHECK(round.ids(SplitPart::Validation) == a.ids(SplitPart::Validation));

  CHECK(kind_of([] { split_dataset(classes_of({4}), 1); }) == ErrorKind::ClassTooSmall);
  CHECK(kind_of([&] { a.part_of("nope"); }) == ErrorKind::IdMismatch);
}

TEST_CASE("NSPF round trip and layout", "[datakit]") {
  const Eigen::MatrixXd m = float_matrix(1000, 31, 3);
  const auto bytes = encode_nspf(m);
  REQUIRE(bytes.size() == kNspfHeaderSize + 4 * 1000 * 31);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NSPF");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK((bytes[6] | bytes[7] << 8) == 1000);
  CHECK(bytes[10] == 31);
  CHECK(decode_nspf(bytes) == m);

  // Payload is little-endian float32, row-major.
  const Eigen::MatrixXd two = (Eigen::MatrixXd(1, 2) << 1.0, -2.0).finished();
  const auto b2 = encode_nspf(two);
  const std::vector<std::uint8_t> payload(b2.begin() + 16, b2.end());
  CHECK(payload == std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0});

  ScratchDir dir("nspf");
  write_nspf(dir / "m.nspf", m);
  CHECK(read_nspf(dir / "m.nspf") == m);
}

TEST_CASE("NSPF corruption is reported with offsets", "[datakit]") {
  const auto good = encode_nspf(float_matrix(3, 4, 1));
  auto offset_of = [](std::vector<std::uint8_t> bytes) -> std::size_t {
    try {
      decode_nspf(bytes);
    } catch (const CorruptFileError& e) {
      return e.offset();
    }
    return static_cast<std::size_t>(-1);
  };
  CHECK(offset_of({good.begin(), good.begin() + 10}) == 10);
  auto magic = good;
  magic[0] = 'X';
  CHECK(offset_of(magic) == 0);
  auto version = good;
  version[4] = 9;
  CHECK(offset_of(version) == 4);
  CHECK(offset_of({good.begin(), good.end() - 1}) == good.size() - 1);
  auto trailing = good;
  trailing.push_back(0);
  CHECK(offset_of(trailing) == good.size());
}

TEST_CASE("manifests and trial files", "[datakit]") {
  const auto doc = KeyValueDoc::parse("# comment\nid: yes_001\n\nlabel: yes\nlist: a, b,c\n");
  CHECK(doc.get("id") == "yes_001");
  CHECK(doc.get_list("list") == std::vector<std::string>{"a", "b", "c"});
  CHECK(KeyValueDoc::parse(doc.to_text()).entries() == doc.entries());
  CHECK(kind_of([&] { doc.get("missing"); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { KeyValueDoc::parse("novalue\n"); }) == ErrorKind::InvalidArgument);

  ScratchDir dir("trial");
  TrialManifest tm;
  tm.id = "yes_001";
  tm.label = "yes";
  tm.eeg_path = "trials/yes_001.eeg.nspf";
  tm.audio_path = "trials/yes_001.audio.nspf";
  tm.channels = standard_channel_labels();
  TrialSignals sig;
  sig.eeg.sample_rate_hz = 1000.0;
  sig.eeg.data = float_matrix(1000, 31, 5);
  sig.audio.sample_rate_hz = 16000.0;
  sig.audio.data = float_matrix(16000, 1, 6);
  save_trial(dir.path(), tm, sig);
  const auto back = load_trial(dir.path(), TrialManifest::from_doc(tm.to_doc()));
  CHECK(back.eeg.data == sig.eeg.data);
  CHECK(back.audio.data == sig.audio.data);
  CHECK(back.eeg.sample_rate_hz == 1000.0);

  write_nspf(dir / tm.eeg_path, float_matrix(1000, 30, 7));
  CHECK(kind_of([&] { load_trial(dir.path(), tm); }) == ErrorKind::ShapeMismatch);

  auto bytes = read_file_bytes(dir / tm.audio_path);
  bytes.resize(bytes.size() / 2);
  write_file_bytes(dir / tm.audio_path, bytes);
  write_nspf(dir / tm.eeg_path, sig.eeg.data);
  CHECK(kind_of([&] { load_trial(dir.path(), tm); }) == ErrorKind::CorruptFile);

  CHECK(kind_of([&] { load_dataset(dir / "absent"); }) == ErrorKind::MissingArtifact);
}

TEST_CASE("synthetic datasets are reproducible", "[datakit]") {
  ScratchDir dir("synth");
  SyntheticSpec spec = tiny_spec();
  const auto a = generate_synthetic(spec, dir / "a");
  generate_synthetic(spec, dir / "b");
  CHECK(a.size() == 8);
  for (const auto& t : a) {
    CHECK(read_file_bytes(dir / "a" / t.eeg_path) == read_file_bytes(dir / "b" / t.eeg_path));
    CHECK(read_file_bytes(dir / "a" / t.audio_path) == read_file_bytes(dir / "b" / t.audio_path));
  }
  CHECK(read_text_file(dir / "a" / "dataset.manifest") == read_text_file(dir / "b" / "dataset.manifest"));

  spec.speech_snr_db = -5.0;
  spec.condition = Condition::Noisy;
  const auto noisy = generate_synthetic(spec, dir / "n");
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(read_file_bytes(dir / "a" / a[i].eeg_path) == read_file_bytes(dir / "n" / noisy[i].eeg_path));
    CHECK(read_file_bytes(dir / "a" / a[i].audio_path) != read_file_bytes(dir / "n" / noisy[i].audio_path));
  }

  const Dataset ds = load_dataset(dir / "a");
  CHECK(ds.trials.size() == 8);
  const auto groups = group_by_class(ds);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].ids.size() == 4);
  CHECK(groups[1].ids.size() == 4);
  const auto trial = load_trial(ds.dir, ds.trials[0]);
  CHECK(trial.eeg.n_channels() == 4);
  CHECK(trial.eeg.n_samples() == 500);
  CHECK(trial.audio.n_samples() == 8000);
}

TEST_CASE("synthetic dataset size and validation", "[datakit]") {
  SyntheticSpec spec;
  spec.duration_s = 0.2;
  spec.eeg_channels = 2;
  ScratchDir dir("synth-size");
  const auto trials = generate_synthetic(spec, dir.path());
  CHECK(trials.size() == 200);
  std::map<std::string, int> per_class;
  for (const auto& t : trials) ++per_class[t.label];
  CHECK(per_class.size() == 4);
  for (const auto& [label, n] : per_class) CHECK(n == 50);

  SyntheticSpec bad = tiny_spec();
  bad.trials_per_class = 0;
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::InvalidArgument);
  bad = tiny_spec();
  bad.signal_channels = {"Zz9"};
  CHECK(kind_of([&] { validate(bad); }) == ErrorKind::UnknownChannel);
  CHECK(default_class_frequencies(4) == std::vector<double>{6.0, 11.0, 17.0, 23.0});
}

TEST_CASE("EEG feature statistics ignore the speech condition", "[datakit]") {
  SyntheticSpec spec = tiny_spec();
  spec.trials_per_class = 3;
  Eigen::MatrixXd clean_rows, noisy_rows;
  for (int cond = 0; cond < 2; ++cond) {
    spec.speech_snr_db = cond == 0 ? 20.0 : -5.0;
    Eigen::MatrixXd rows;
    for (int i = 0; i < 6; ++i) {
      const auto t = synthesize_trial(spec, i / 3, i);
      const auto f = extract_eeg_features(t.eeg).data;
      rows.conservativeResize(rows.rows() + f.rows(), f.cols());
      rows.bottomRows(f.rows()) = f;
    }
    (cond == 0 ? clean_rows : noisy_rows) = rows;
  }
  for (Eigen::Index j = 0; j < clean_rows.cols(); ++j) {
    const double ma = clean_rows.col(j).mean(), mb = noisy_rows.col(j).mean();
    const double va = (clean_rows.col(j).array() - ma).square().mean();
    const double vb = (noisy_rows.col(j).array() - mb).square().mean();
    const double pooled = std::sqrt(0.5 * (va + vb));
    CHECK(std::abs(ma - mb) <= 0.05 * pooled + 1e-12);
  }
}

TEST_CASE("metrics records and accuracy tables", "[datakit]") {
  MetricsRecord r;
  r.experiment_id = "eeg-words-noisy";
  r.feature_mode = FeatureMode::Eeg;
  r.dataset_tag = "words";
  r.condition = "noisy";
  r.train_accuracy = 1.0;
  r.val_accuracy = 0.96875;
  r.test_accuracy = 0.9938;
  r.config = {{"seed", "42"}, {"epochs", "30"}};
  const auto back = MetricsRecord::from_json(r.to_json());
  CHECK(back.experiment_id == r.experiment_id);
  CHECK(back.feature_mode == FeatureMode::Eeg);
  CHECK(back.test_accuracy == r.test_accuracy);
  CHECK(back.config == r.config);
  CHECK(parse_feature_mode("fused") == FeatureMode::Fused);
  CHECK(kind_of([] { MetricsRecord::from_json("{\"kind\":\"nsp-metrics\",\"test_accuracy\":2}"); }) == ErrorKind::InvalidArgument);

  MetricsRecord mfcc = r, fused = r;
  mfcc.feature_mode = FeatureMode::Mfcc;
  mfcc.test_accuracy = 0.93;
  fused.feature_mode = FeatureMode::Fused;
  fused.test_accuracy = 0.975;
  const auto table = accuracy_table({mfcc, fused, r});
  REQUIRE(table.rows.size() == 1);
  REQUIRE(table.columns == std::vector<FeatureMode>{FeatureMode::Mfcc, FeatureMode::Fused, FeatureMode::Eeg});
  CHECK(table.rows[0].best == std::optional<std::size_t>(2));
  CHECK(table.to_markdown() ==
        "| Dataset | Condition | MFCC acc | FUSED acc | EEG acc |\n"
        "|---|---|---|---|---|\n"
        "| words | noisy | 93.00 | 97.50 | **99.38** |\n");

  const auto single = accuracy_table({mfcc});
  CHECK(single.columns.size() == 1);
  CHECK(single.rows.size() == 1);
  CHECK(single.rows[0].best == std::optional<std::size_t>(0));

  const auto empty = accuracy_table({});
  CHECK(empty.empty());
  CHECK(empty.to_markdown("x").empty());

  ScratchDir dir("records");
  write_record(dir / "a" / "metrics.json", r);
  write_record(dir / "b" / "metrics.json", mfcc);
  write_text_file(dir / "c" / "other.json", "{\"kind\": \"something-else\"}");
  const auto found = collect_records(dir.path());
  REQUIRE(found.size() == 2);
  CHECK(found[0].feature_mode == FeatureMode::Eeg);
  CHECK(found[1].feature_mode == FeatureMode::Mfcc);
}

TEST_CASE("model containers round-trip every tensor", "[datakit]") {
  ScratchDir dir("container");
  const ModelParams m = oracle::toy_model(5, 4, 3, 2, Pooling::Last, 1);
  const Standardizer st = Standardizer::fit(oracle::random_matrix(10, 5, 2));
  const KpcaModel kp = kpca_fit(oracle::random_matrix(12, 5, 3), 3);
  const AutoencoderModel ae = autoencoder_fit(oracle::random_matrix(12, 5, 4), 3, 5);

  ModelContainer c;
  c.kind = "test";
  pack(c, "m.", m);
  pack(c, "s.", st);
  pack(c, "k.", kp);
  pack(c, "a.", ae);
  c.save(dir / "c.json");
  const auto back = ModelContainer::load(dir / "c.json", "test");

  ModelParams original = m;
  ModelParams restored = unpack_model(back, "m.");
  CHECK(restored.pooling == Pooling::Last);
  CHECK(restored.dropout_rate == m.dropout_rate);
  ModelParams::zip([](const char* name, const auto& a, const auto& b) {
    INFO(name);
    CHECK(a == b);
  }, original, restored);
  const Standardizer st2 = unpack_standardizer(back, "s.");
  CHECK(st2.mean == st.mean);
  CHECK(st2.scale == st.scale);
  const KpcaModel kp2 = unpack_kpca(back, "k.");
  const Eigen::MatrixXd probe = oracle::random_matrix(3, 5, 9);
  CHECK(kpca_transform(kp2, probe) == kpca_transform(kp, probe));
  const AutoencoderModel ae2 = unpack_autoencoder(back, "a.");
  CHECK(autoencoder_encode(ae2, probe) == autoencoder_encode(ae, probe));
  CHECK(ae2.loss_history == ae.loss_history);

  CHECK(kind_of([&] { ModelContainer::load(dir / "c.json", "other"); }) == ErrorKind::CorruptFile);
  CHECK(kind_of([&] { ModelContainer::load(dir / "none.json"); }) == ErrorKind::MissingArtifact);
  write_text_file(dir / "bad.json", "{ not json");
  CHECK(kind_of([&] { ModelContainer::load(dir / "bad.json"); }) == ErrorKind::CorruptFile);
  CHECK(kind_of([&] { back.tensor("absent"); }) == ErrorKind::CorruptFile);
}

TEST_CASE("channel label inventory", "[datakit]") {
  const auto& labels = standard_channel_labels();
  CHECK(labels.size() == 31);
  CHECK(std::set<std::string>(labels.begin(), labels.end()).size() == 31);
  for (const auto& ch : four_channel_subset()) {
    CHECK(std::find(labels.begin(), labels.end(), ch) != labels.end());
  }
  const auto more = channel_labels(33);
  CHECK(more[31] == "Ch32");
  CHECK(more[32] == "Ch33");
}
