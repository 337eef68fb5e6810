#include "nsp/cli/pipeline.hpp"

#include "nsp/datakit/nspf.hpp"
#include "nsp/eeg_features.hpp"
#include "nsp/errors.hpp"
#include "nsp/feature_sequence.hpp"
#include "nsp/mfcc.hpp"
#include "nsp/parallel.hpp"
#include "nsp/rng.hpp"
#include "nsp/signal.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>

namespace nsp::cli {

namespace fs = std::filesystem;
using datakit::FeatureMode;

namespace {

constexpr double kBandLowHz = 0.1;
constexpr double kBandHighHz = 70.0;
constexpr int kBandOrder = 4;
constexpr double kMainsHz = 60.0;

fs::path eeg_path(const fs::path& dir, const std::string& id) { return dir / "eeg" / (id + ".nspf"); }
fs::path mfcc_path(const fs::path& dir, const std::string& id) { return dir / "mfcc" / (id + ".nspf"); }

MultichannelSignal preprocess_eeg(const MultichannelSignal& raw) {
  const IirFilter band = design_bandpass(kBandLowHz, kBandHighHz, kBandOrder, raw.sample_rate_hz);
  const IirFilter notch = design_notch(kMainsHz, raw.sample_rate_hz);
  return apply_filter(notch, apply_filter(band, raw));
}

Eigen::MatrixXd stack_rows(const std::vector<Eigen::MatrixXd>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Eigen::MatrixXd out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

// Canonical spelling of each requested label (matched case-insensitively).
std::vector<std::string> resolve_channels(const std::vector<std::string>& labels,
                                          const std::vector<std::string>& wanted) {
  std::vector<std::string> out;
  for (const auto& w : wanted) {
    const auto it = std::find_if(labels.begin(), labels.end(), [&](const std::string& l) {
      return std::equal(w.begin(), w.end(), l.begin(), l.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
      });
    });
    if (it == labels.end()) fail(ErrorKind::UnknownChannel, "unknown channel '" + w + "'");
    out.push_back(*it);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Eigen::MatrixXd FeatureStore::eeg(const std::string& id) const { return datakit::read_nspf(eeg_path(dir, id)); }

Eigen::MatrixXd FeatureStore::mfcc(const std::string& id) const { return datakit::read_nspf(mfcc_path(dir, id)); }

const FeatureStore::Trial& FeatureStore::trial(const std::string& id) const {
  for (const auto& t : trials) {
    if (t.id == id) return t;
  }
  fail(ErrorKind::IdMismatch, "feature store has no trial '" + id + "'");
}

std::vector<fs::path> extract_features(const datakit::Dataset& ds, const std::vector<std::string>& channels,
                                       std::uint64_t seed, int jobs, const fs::path& out_dir) {
  if (ds.trials.empty()) fail(ErrorKind::InvalidArgument, "dataset has no trials");
  const auto split = datakit::split_dataset(datakit::group_by_class(ds), seed);
  const std::vector<std::string> kept = channels.empty() ? ds.trials.front().channels : channels;

  const std::vector<std::string> canonical = resolve_channels(ds.trials.front().channels, kept);

  parallel_for(ds.trials.size(), jobs, [&](std::size_t i) {
    const auto& t = ds.trials[i];
    const datakit::TrialSignals sig = datakit::load_trial(ds.dir, t);
    const MultichannelSignal eeg = select_channels(preprocess_eeg(sig.eeg), t.channels, canonical);
    datakit::write_nspf(eeg_path(out_dir, t.id), extract_eeg_features(eeg).data);
    datakit::write_nspf(mfcc_path(out_dir, t.id), extract_mfcc(sig.audio).data);
  });

  datakit::KeyValueDoc doc;
  doc.set("format", "nsp-features-1");
  doc.set("dataset_tag", ds.info.tag);
  doc.set("condition", std::string(datakit::to_string(ds.info.condition)));
  doc.set("vocabulary", datakit::join_list(ds.info.vocabulary));
  doc.set("channels", datakit::join_list(canonical));
  doc.set("seed", std::to_string(seed));
  doc.set("trial_count", std::to_string(ds.trials.size()));
  std::vector<std::string> ids, labels;
  for (const auto& t : ds.trials) {
    ids.push_back(t.id);
    labels.push_back(t.label);
  }
  doc.set("trials", datakit::join_list(ids));
  doc.set("labels", datakit::join_list(labels));

  const fs::path manifest = out_dir / kFeatureManifest;
  const fs::path split_file = out_dir / kSplitManifest;
  doc.save(manifest);
  split.to_doc().save(split_file);
  return {manifest, split_file};
}

FeatureStore load_feature_store(const fs::path& dir) {
  if (!fs::is_regular_file(dir / kFeatureManifest) || !fs::is_regular_file(dir / kSplitManifest)) {
    fail(ErrorKind::MissingArtifact, "no feature store at " + dir.string() + " (run `nsp features` first)");
  }
  const auto doc = datakit::KeyValueDoc::load(dir / kFeatureManifest);
  if (doc.get("format") != "nsp-features-1") {
    throw CorruptFileError("unsupported feature store format '" + doc.get("format") + "'", 0);
  }
  FeatureStore s;
  s.dir = dir;
  s.dataset_tag = doc.get("dataset_tag");
  s.condition = datakit::parse_condition(doc.get("condition"));
  s.vocabulary = doc.get_list("vocabulary");
  s.channels = doc.get_list("channels");
  s.seed = static_cast<std::uint64_t>(doc.get_int("seed"));
  const auto ids = doc.get_list("trials");
  const auto labels = doc.get_list("labels");
  if (ids.size() != labels.size() || static_cast<long long>(ids.size()) != doc.get_int("trial_count")) {
    throw CorruptFileError("feature store trial list is inconsistent", 0);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = std::find(s.vocabulary.begin(), s.vocabulary.end(), labels[i]);
    if (it == s.vocabulary.end()) throw CorruptFileError("feature store label '" + labels[i] + "' not in vocabulary", 0);
    s.trials.push_back({ids[i], static_cast<int>(it - s.vocabulary.begin())});
  }
  s.split = datakit::SplitAssignment::from_doc(datakit::KeyValueDoc::load(dir / kSplitManifest));
  return s;
}

std::string_view to_string(ReducerKind k) { return k == ReducerKind::Kpca ? "kpca" : "autoencoder"; }

ReducerKind parse_reducer_kind(std::string_view text) {
  if (text == "kpca" || text == "KPCA") return ReducerKind::Kpca;
  if (text == "autoencoder" || text == "AUTOENCODER") return ReducerKind::Autoencoder;
  fail(ErrorKind::InvalidArgument, "unknown reducer '" + std::string(text) + "'");
}

Reducer fit_reducer(const FeatureStore& store, const ReducerOptions& opts) {
  if (opts.fit_rows < 1) fail(ErrorKind::InvalidArgument, "reducer fit rows must be positive");
  std::vector<Eigen::MatrixXd> parts;
  for (const auto& id : store.split.ids(datakit::SplitPart::Train)) parts.push_back(store.eeg(id));
  const Eigen::MatrixXd all = stack_rows(parts);

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(all.rows()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (static_cast<Eigen::Index>(rows.size()) > opts.fit_rows) {
    Rng rng(derive_seed(opts.seed, "reducer/subsample"));
    shuffle(rows, rng);
    rows.resize(static_cast<std::size_t>(opts.fit_rows));
    std::sort(rows.begin(), rows.end());
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), all.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = all.row(rows[i]);

  if (opts.kind == ReducerKind::Kpca) {
    return kpca_fit(x, opts.components, PolynomialKernel{opts.degree, 1.0});
  }
  return autoencoder_fit(x, opts.autoencoder_epochs, derive_seed(opts.seed, "autoencoder/init"));
}

void pack_reducer(datakit::ModelContainer& c, const std::string& prefix, const Reducer& r) {
  if (const auto* k = std::get_if<KpcaModel>(&r)) {
    c.meta[prefix + "kind"] = "kpca";
    datakit::pack(c, prefix, *k);
  } else {
    c.meta[prefix + "kind"] = "autoencoder";
    datakit::pack(c, prefix, std::get<AutoencoderModel>(r));
  }
}

Reducer unpack_reducer(const datakit::ModelContainer& c, const std::string& prefix) {
  const std::string& kind = c.meta_value(prefix + "kind");
  if (kind == "kpca") return datakit::unpack_kpca(c, prefix);
  if (kind == "autoencoder") return datakit::unpack_autoencoder(c, prefix);
  throw CorruptFileError("unknown reducer kind '" + kind + "' in model container", 0);
}

Eigen::MatrixXd model_input(const FeatureStore& store, const std::string& id, FeatureMode mode,
                            const Reducer* reducer) {
  if (mode == FeatureMode::Mfcc || mode == FeatureMode::Student) return store.mfcc(id);
  FeatureSequence eeg{store.eeg(id), 100.0, Modality::Eeg};
  if (reducer != nullptr) eeg = reduce_sequence(*reducer, eeg);
  if (mode == FeatureMode::Eeg) return std::move(eeg.data);
  return fuse(eeg, FeatureSequence{store.mfcc(id), 100.0, Modality::Mfcc}).data;
}

Splits build_splits(const FeatureStore& store, FeatureMode mode, const Reducer* reducer,
                    std::optional<Standardizer>& standardizer) {
  Splits s;
  const auto fill = [&](datakit::SplitPart part, Split& out) {
    for (const auto& id : store.split.ids(part)) {
      out.push_back({id, model_input(store, id, mode, reducer), store.trial(id).label});
    }
  };
  fill(datakit::SplitPart::Train, s.train);
  fill(datakit::SplitPart::Validation, s.validation);
  fill(datakit::SplitPart::Test, s.test);
  if (!standardizer) {
    std::vector<Eigen::MatrixXd> parts;
    for (const auto& ex : s.train) parts.push_back(ex.features);
    standardizer = Standardizer::fit(stack_rows(parts));
  }
  for (Split* split : {&s.train, &s.validation, &s.test}) {
    for (auto& ex : *split) ex.features = standardizer->apply(ex.features);
  }
  return s;
}

Splits build_channel_splits(const FeatureStore& store, int channel) {
  if (channel < 0 || channel >= static_cast<int>(store.channels.size())) {
    fail(ErrorKind::InvalidArgument, "channel index out of range");
  }
  Splits s;
  const auto fill = [&](datakit::SplitPart part, Split& out) {
    for (const auto& id : store.split.ids(part)) {
      out.push_back({id, store.eeg(id).middleCols(5 * channel, 5), store.trial(id).label});
    }
  };
  fill(datakit::SplitPart::Train, s.train);
  fill(datakit::SplitPart::Validation, s.validation);
  fill(datakit::SplitPart::Test, s.test);
  std::vector<Eigen::MatrixXd> parts;
  for (const auto& ex : s.train) parts.push_back(ex.features);
  const Standardizer st = Standardizer::fit(stack_rows(parts));
  for (Split* split : {&s.train, &s.validation, &s.test}) {
    for (auto& ex : *split) ex.features = st.apply(ex.features);
  }
  return s;
}

datakit::ModelContainer pack_classifier(const Classifier& c) {
  datakit::ModelContainer out;
  out.kind = kClassifierKind;
  out.meta["mode"] = std::string(datakit::to_string(c.mode));
  datakit::pack(out, "model.", c.params);
  datakit::pack(out, "input.", c.input);
  if (c.reducer) pack_reducer(out, "reducer.", *c.reducer);
  return out;
}

Classifier unpack_classifier(const datakit::ModelContainer& c) {
  if (c.kind != kClassifierKind) throw CorruptFileError("model container is not a classifier", 0);
  Classifier out;
  out.mode = datakit::parse_feature_mode(c.meta_value("mode"));
  out.params = datakit::unpack_model(c, "model.");
  out.input = datakit::unpack_standardizer(c, "input.");
  if (c.meta.count("reducer.kind") != 0) out.reducer = unpack_reducer(c, "reducer.");
  return out;
}

void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history) {
  std::string text = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const auto& r : history) {
    text += std::to_string(r.epoch) + ',' + format_double(r.train_loss) + ',' + format_double(r.train_accuracy) +
            ',' + format_double(r.val_loss) + ',' + format_double(r.val_accuracy) + '\n';
  }
  datakit::write_text_file(path, text);
}

}  // namespace nsp::cli
