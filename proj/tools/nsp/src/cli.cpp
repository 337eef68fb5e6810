#include "nsp/cli/cli.hpp"

#include "nsp/cli/pipeline.hpp"
#include "nsp/cli/report.hpp"
#include "nsp/datakit/nspf.hpp"
#include "nsp/datakit/synth.hpp"
#include "nsp/distill.hpp"
#include "nsp/errors.hpp"
#include "nsp/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>

namespace nsp::cli {

namespace fs = std::filesystem;
using datakit::FeatureMode;
using datakit::write_text_file;

namespace {

struct Common {
  std::uint64_t seed = 42;
  int jobs = 1;
  bool verbose = false;
};

struct TrainFlags {
  int epochs = 10000;
  double lr = 0.001;
  int hidden = 128;
  int dense = 64;
  double dropout = 0.2;
  std::string pooling = "average";

  void add_to(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--hidden", hidden, "GRU hidden units")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--dense", dense, "Dense layer width")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--dropout", dropout, "Dense-layer dropout rate")->capture_default_str()->check(CLI::Range(0.0, 0.999));
  }

  TrainConfig config(std::uint64_t seed) const {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.seed = seed;
    return c;
  }

  ModelShape shape(int input_dim, int classes, Pooling p) const {
    return ModelShape{input_dim, hidden, dense, classes, p, dropout};
  }

  void snapshot(std::map<std::string, std::string>& cfg, std::uint64_t seed) const {
    cfg["epochs"] = std::to_string(epochs);
    cfg["learning_rate"] = format_double(lr);
    cfg["hidden"] = std::to_string(hidden);
    cfg["dense"] = std::to_string(dense);
    cfg["dropout"] = format_double(dropout);
    cfg["batch_size"] = "1";
    cfg["seed"] = std::to_string(seed);
  }
};

struct Outputs {
  std::ostream& out;
  void operator()(const fs::path& p) const { out << p.string() << '\n'; }
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string default_experiment_id(std::string_view prefix, const FeatureStore& store, std::uint64_t seed) {
  return lower(std::string(prefix)) + "-" + store.dataset_tag + "-" +
         std::string(datakit::to_string(store.condition)) + "-s" + std::to_string(seed);
}

fs::path resolve_file(const fs::path& p, const char* default_name) {
  return fs::is_directory(p) ? p / default_name : p;
}

datakit::ModelContainer load_container(const fs::path& p, const char* default_name, const char* kind,
                                       const char* what) {
  const fs::path file = resolve_file(p, default_name);
  if (!fs::is_regular_file(file)) {
    fail(ErrorKind::MissingArtifact, std::string(what) + " not found at " + file.string());
  }
  try {
    return datakit::ModelContainer::load(file, kind);
  } catch (const CorruptFileError& e) {
    fail(ErrorKind::MissingArtifact, std::string(what) + " at " + file.string() + " is unreadable: " + e.what());
  }
}

std::function<void(const EpochRecord&)> progress(const Common& common, std::ostream& err, std::string tag) {
  if (!common.verbose) return {};
  return [&err, tag = std::move(tag)](const EpochRecord& r) {
    char line[160];
    std::snprintf(line, sizeof line, "[%s] epoch %d loss %.4f train %.3f val %.3f\n", tag.c_str(), r.epoch,
                  r.train_loss, r.train_accuracy, r.val_accuracy);
    err << line << std::flush;
  };
}

datakit::MetricsRecord make_record(std::string id, FeatureMode mode, const FeatureStore& store,
                                   const ModelParams& m, const Splits& s) {
  datakit::MetricsRecord r;
  r.experiment_id = std::move(id);
  r.feature_mode = mode;
  r.dataset_tag = store.dataset_tag;
  r.condition = std::string(datakit::to_string(store.condition));
  r.train_accuracy = evaluate(m, s.train);
  r.val_accuracy = evaluate(m, s.validation);
  r.test_accuracy = evaluate(m, s.test);
  return r;
}

FeatureMode parse_train_mode(const std::string& text) {
  const FeatureMode m = datakit::parse_feature_mode(text);
  if (m == FeatureMode::Student) {
    fail(ErrorKind::InvalidArgument, "mode 'student' is produced by `nsp distill`, not `nsp train`");
  }
  return m;
}

// Teacher inputs and soft targets on the training split.
struct TeacherData {
  Classifier teacher;
  SoftTargetSet targets;
};

TeacherData load_teacher(const fs::path& path, const FeatureStore& store) {
  TeacherData t;
  t.teacher = unpack_classifier(load_container(path, "model.json", kClassifierKind, "teacher checkpoint"));
  if (t.teacher.mode != FeatureMode::Fused) {
    fail(ErrorKind::InvalidArgument, "teacher must be a FUSED model (train it with --mode fused --pooling last)");
  }
  std::optional<Standardizer> st = t.teacher.input;
  const Splits fused = build_splits(store, FeatureMode::Fused, t.teacher.reducer ? &*t.teacher.reducer : nullptr, st);
  t.targets = soft_targets(t.teacher.params, fused.train);
  return t;
}

std::vector<double> parse_grid(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& item : datakit::split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, std::string("bad ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::InvalidArgument, std::string(what) + " list is empty");
  return out;
}

std::string cell_name(const DistillConfig& c) {
  return "T" + format_double(c.temperature) + "_L" + format_double(c.lambda);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG and speech feature pipeline, GRU classifiers, and distillation experiments", "nsp"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
  Common common;
  app.add_option("--seed", common.seed, "Root seed for every random stream")->capture_default_str();
  app.add_option("--jobs", common.jobs, "Parallel workers for per-trial, per-cell, per-channel work")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", common.verbose, "Per-epoch progress on stderr");
  const Outputs emit{out};

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic EEG/speech dataset");
  datakit::SyntheticSpec spec;
  std::string synth_out, synth_condition = "clean";
  std::vector<std::string> signal_channels;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--classes", spec.n_classes, "Number of classes")->capture_default_str();
  synth->add_option("--per-class", spec.trials_per_class, "Trials per class")->capture_default_str();
  synth->add_option("--eeg-channels", spec.eeg_channels, "EEG channel count")->capture_default_str();
  synth->add_option("--duration", spec.duration_s, "Trial duration in seconds")->capture_default_str();
  synth->add_option("--eeg-snr", spec.eeg_snr_db, "EEG SNR in dB")->capture_default_str();
  synth->add_option("--speech-snr", spec.speech_snr_db, "Speech-to-background SNR in dB")->capture_default_str();
  synth->add_option("--condition", synth_condition, "Condition label: clean or noisy")->capture_default_str();
  synth->add_option("--signal-channels", signal_channels, "Channels carrying the class signature (default: all)")
      ->delimiter(',');
  synth->add_option("--tag", spec.tag, "Dataset tag")->capture_default_str();

  // features
  auto* features = app.add_subcommand("features", "Filter trials and extract EEG and MFCC feature sequences");
  std::string feat_data, feat_out;
  std::vector<std::string> feat_channels;
  features->add_option("--data", feat_data, "Dataset directory")->required();
  features->add_option("--out", feat_out, "Feature directory")->required();
  features->add_option("--channels", feat_channels, "EEG channel subset, e.g. T7,T8,Fc5,P7")->delimiter(',');

  // reduce
  auto* reduce = app.add_subcommand("reduce", "Fit KPCA or autoencoder reduction of EEG features");
  std::string red_features, red_out, red_kind = "kpca";
  ReducerOptions red_opts;
  reduce->add_option("--features", red_features, "Feature directory")->required();
  reduce->add_option("--out", red_out, "Reducer output directory")->required();
  reduce->add_option("--reducer", red_kind, "kpca or autoencoder")->capture_default_str();
  reduce->add_option("--components", red_opts.components, "KPCA components")->capture_default_str();
  reduce->add_option("--degree", red_opts.degree, "KPCA polynomial degree")->capture_default_str();
  reduce->add_option("--fit-rows", red_opts.fit_rows, "Max training frames used for the fit")->capture_default_str();
  reduce->add_option("--ae-epochs", red_opts.autoencoder_epochs, "Autoencoder epochs")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a GRU classifier on MFCC, EEG or fused features");
  std::string tr_features, tr_out, tr_mode = "mfcc", tr_reducer, tr_id;
  TrainFlags tr_flags;
  train_cmd->add_option("--features", tr_features, "Feature directory")->required();
  train_cmd->add_option("--out", tr_out, "Model output directory")->required();
  train_cmd->add_option("--mode", tr_mode, "mfcc, eeg or fused")->capture_default_str();
  train_cmd->add_option("--reducer", tr_reducer, "Reducer directory for EEG/fused inputs (raw EEG features if omitted)");
  train_cmd->add_option("--pooling", tr_flags.pooling, "average or last")->capture_default_str();
  train_cmd->add_option("--id", tr_id, "Experiment id for the metrics record");
  tr_flags.add_to(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model on a feature directory");
  std::string ev_model, ev_features, ev_out, ev_id;
  eval_cmd->add_option("--model", ev_model, "Model directory or model.json")->required();
  eval_cmd->add_option("--features", ev_features, "Feature directory")->required();
  eval_cmd->add_option("--out", ev_out, "Metrics record path (default: <model dir>/eval.json)");
  eval_cmd->add_option("--id", ev_id, "Experiment id for the metrics record");

  // distill
  auto* distill_cmd = app.add_subcommand("distill", "Train an MFCC student from a fused teacher's soft targets");
  std::string di_features, di_teacher, di_out, di_id;
  DistillConfig di_cfg{2.0, 0.2};
  TrainFlags di_flags;
  distill_cmd->add_option("--features", di_features, "Feature directory")->required();
  distill_cmd->add_option("--teacher", di_teacher, "Teacher model directory")->required();
  distill_cmd->add_option("--out", di_out, "Student output directory")->required();
  distill_cmd->add_option("--temperature", di_cfg.temperature, "Softmax temperature")->capture_default_str();
  distill_cmd->add_option("--lambda", di_cfg.lambda, "Imitation weight on the soft loss")->capture_default_str();
  distill_cmd->add_option("--id", di_id, "Experiment id for the metrics record");
  di_flags.add_to(distill_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over temperature and lambda for the student");
  std::string sw_features, sw_teacher, sw_out, sw_temps = "1,2,5,10", sw_lambdas = "0,0.2,0.8,1";
  TrainFlags sw_flags;
  sweep_cmd->add_option("--features", sw_features, "Feature directory")->required();
  sweep_cmd->add_option("--teacher", sw_teacher, "Teacher model directory")->required();
  sweep_cmd->add_option("--out", sw_out, "Sweep output directory")->required();
  sweep_cmd->add_option("--temps", sw_temps, "Comma-separated temperatures")->capture_default_str();
  sweep_cmd->add_option("--lambdas", sw_lambdas, "Comma-separated lambdas")->capture_default_str();
  sw_flags.add_to(sweep_cmd);

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Per-channel EEG-only accuracy from single-channel models");
  std::string ab_features, ab_out;
  TrainFlags ab_flags;
  ablate_cmd->add_option("--features", ab_features, "Feature directory")->required();
  ablate_cmd->add_option("--out", ab_out, "Ablation output directory")->required();
  ab_flags.add_to(ablate_cmd);

  // report
  auto* report_cmd = app.add_subcommand("report", "Tables and plot-ready CSV from experiment outputs");
  std::string rp_records, rp_out;
  report_cmd->add_option("--records", rp_records, "Directory searched recursively for outputs")->required();
  report_cmd->add_option("--out", rp_out, "Report output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  const bool dataset_stage = features->parsed();
  try {
    if (synth->parsed()) {
      spec.seed = common.seed;
      spec.condition = datakit::parse_condition(synth_condition);
      spec.signal_channels = signal_channels;
      datakit::generate_synthetic(spec, synth_out);
      emit(fs::path(synth_out) / datakit::kDatasetManifestName);
    } else if (features->parsed()) {
      const datakit::Dataset ds = datakit::load_dataset(feat_data);
      for (const auto& p : extract_features(ds, feat_channels, common.seed, common.jobs, feat_out)) emit(p);
    } else if (reduce->parsed()) {
      const FeatureStore store = load_feature_store(red_features);
      red_opts.kind = parse_reducer_kind(red_kind);
      red_opts.seed = common.seed;
      const Reducer r = fit_reducer(store, red_opts);
      datakit::ModelContainer c;
      c.kind = kReducerKind;
      pack_reducer(c, "", r);
      const fs::path model = fs::path(red_out) / "reducer.json";
      c.save(model);
      emit(model);
      if (const auto* k = std::get_if<KpcaModel>(&r)) {
        const Eigen::VectorXd curve = explained_variance_curve(*k);
        std::string csv = "components,cumulative_explained_variance\n";
        for (Eigen::Index i = 0; i < curve.size(); ++i) csv += std::to_string(i + 1) + ',' + format_double(curve(i)) + '\n';
        write_text_file(fs::path(red_out) / "explained_variance.csv", csv);
        emit(fs::path(red_out) / "explained_variance.csv");
      } else {
        const auto& hist = std::get<AutoencoderModel>(r).loss_history;
        std::string csv = "epoch,reconstruction_mse\n";
        for (std::size_t i = 0; i < hist.size(); ++i) csv += std::to_string(i + 1) + ',' + format_double(hist[i]) + '\n';
        write_text_file(fs::path(red_out) / "autoencoder_loss.csv", csv);
        emit(fs::path(red_out) / "autoencoder_loss.csv");
      }
    } else if (train_cmd->parsed()) {
      const FeatureStore store = load_feature_store(tr_features);
      Classifier cls;
      cls.mode = parse_train_mode(tr_mode);
      if (!tr_reducer.empty() && cls.mode != FeatureMode::Mfcc) {
        cls.reducer = unpack_reducer(load_container(tr_reducer, "reducer.json", kReducerKind, "reducer"), "");
      }
      std::optional<Standardizer> st;
      const Splits s = build_splits(store, cls.mode, cls.reducer ? &*cls.reducer : nullptr, st);
      cls.input = *st;
      TrainConfig tcfg = tr_flags.config(common.seed);
      tcfg.on_epoch = progress(common, err, "train");
      const ModelShape shape = tr_flags.shape(static_cast<int>(s.train.front().features.cols()),
                                              static_cast<int>(store.vocabulary.size()), parse_pooling(tr_flags.pooling));
      TrainResult tr = train(s.train, s.validation, init_model(shape, common.seed), tcfg);
      cls.params = std::move(tr.model);

      const fs::path dir = tr_out;
      pack_classifier(cls).save(dir / "model.json");
      write_history_csv(dir / "history.csv", tr.history);
      auto rec = make_record(tr_id.empty() ? default_experiment_id(tr_mode, store, common.seed) : tr_id, cls.mode,
                             store, cls.params, s);
      tr_flags.snapshot(rec.config, common.seed);
      rec.config["pooling"] = std::string(to_string(cls.params.pooling));
      rec.config["reducer"] = cls.reducer ? (std::holds_alternative<KpcaModel>(*cls.reducer) ? "kpca" : "autoencoder") : "none";
      rec.config["input_dim"] = std::to_string(shape.input_dim);
      datakit::write_record(dir / "metrics.json", rec);
      emit(dir / "model.json");
      emit(dir / "history.csv");
      emit(dir / "metrics.json");
    } else if (eval_cmd->parsed()) {
      const Classifier cls = unpack_classifier(load_container(ev_model, "model.json", kClassifierKind, "model"));
      const FeatureStore store = load_feature_store(ev_features);
      std::optional<Standardizer> st = cls.input;
      const Splits s = build_splits(store, cls.mode, cls.reducer ? &*cls.reducer : nullptr, st);
      auto rec = make_record(ev_id.empty() ? default_experiment_id(datakit::to_string(cls.mode), store, common.seed) : ev_id,
                             cls.mode, store, cls.params, s);
      rec.config["pooling"] = std::string(to_string(cls.params.pooling));
      rec.config["hidden"] = std::to_string(cls.params.gru.hidden());
      const fs::path dest = ev_out.empty() ? resolve_file(ev_model, "model.json").parent_path() / "eval.json" : fs::path(ev_out);
      datakit::write_record(dest, rec);
      emit(dest);
    } else if (distill_cmd->parsed()) {
      validate(di_cfg);
      const FeatureStore store = load_feature_store(di_features);
      const TeacherData teacher = load_teacher(di_teacher, store);
      Classifier cls;
      cls.mode = FeatureMode::Student;
      std::optional<Standardizer> st;
      const Splits s = build_splits(store, FeatureMode::Student, nullptr, st);
      cls.input = *st;
      TrainConfig tcfg = di_flags.config(common.seed);
      tcfg.on_epoch = progress(common, err, "distill");
      const ModelShape shape = di_flags.shape(static_cast<int>(s.train.front().features.cols()),
                                              static_cast<int>(store.vocabulary.size()), Pooling::Last);
      TrainResult tr = train_student(s.train, s.validation, teacher.targets, di_cfg, shape, tcfg);
      cls.params = std::move(tr.model);
      const fs::path dir = di_out;
      pack_classifier(cls).save(dir / "model.json");
      write_history_csv(dir / "history.csv", tr.history);
      auto rec = make_record(di_id.empty() ? default_experiment_id("student", store, common.seed) : di_id,
                             FeatureMode::Student, store, cls.params, s);
      di_flags.snapshot(rec.config, common.seed);
      rec.config["temperature"] = format_double(di_cfg.temperature);
      rec.config["lambda"] = format_double(di_cfg.lambda);
      rec.config["pooling"] = "last";
      datakit::write_record(dir / "metrics.json", rec);
      emit(dir / "model.json");
      emit(dir / "history.csv");
      emit(dir / "metrics.json");
    } else if (sweep_cmd->parsed()) {
      const auto temps = parse_grid(sw_temps, "temperature");
      const auto lambdas = parse_grid(sw_lambdas, "lambda");
      const FeatureStore store = load_feature_store(sw_features);
      const TeacherData teacher = load_teacher(sw_teacher, store);
      std::optional<Standardizer> st;
      const Splits s = build_splits(store, FeatureMode::Student, nullptr, st);
      const ModelShape shape = sw_flags.shape(static_cast<int>(s.train.front().features.cols()),
                                              static_cast<int>(store.vocabulary.size()), Pooling::Last);
      TrainConfig tcfg = sw_flags.config(common.seed);
      const SweepResult res = grid_sweep(MfccSplits{s.train, s.validation, s.test}, teacher.targets, temps, lambdas,
                                         shape, tcfg, common.jobs);
      const fs::path dir = sw_out;
      std::string csv = "temperature,lambda,train_accuracy,val_accuracy,test_accuracy,best\n";
      std::vector<fs::path> written;
      for (std::size_t i = 0; i < res.cells.size(); ++i) {
        const SweepCell& c = res.cells[i];
        csv += format_double(c.config.temperature) + ',' + format_double(c.config.lambda) + ',' +
               format_double(c.train_accuracy) + ',' + format_double(c.val_accuracy) + ',' +
               format_double(c.test_accuracy) + ',' + (i == res.best ? "1" : "0") + '\n';
        datakit::MetricsRecord rec;
        rec.experiment_id = "sweep/" + cell_name(c.config);
        rec.feature_mode = FeatureMode::Student;
        rec.dataset_tag = store.dataset_tag;
        rec.condition = std::string(datakit::to_string(store.condition));
        rec.train_accuracy = c.train_accuracy;
        rec.val_accuracy = c.val_accuracy;
        rec.test_accuracy = c.test_accuracy;
        sw_flags.snapshot(rec.config, common.seed);
        rec.config["temperature"] = format_double(c.config.temperature);
        rec.config["lambda"] = format_double(c.config.lambda);
        const fs::path p = dir / "cells" / (cell_name(c.config) + ".json");
        datakit::write_record(p, rec);
        written.push_back(p);
        if (i == res.best) {
          rec.experiment_id = "sweep/best";
          datakit::write_record(dir / "best.json", rec);
        }
      }
      write_text_file(dir / "sweep.csv", csv);
      write_text_file(dir / "sweep.md", sweep_markdown(res));
      emit(dir / "sweep.csv");
      emit(dir / "sweep.md");
      emit(dir / "best.json");
      for (const auto& p : written) emit(p);
    } else if (ablate_cmd->parsed()) {
      const FeatureStore store = load_feature_store(ab_features);
      const std::size_t n = store.channels.size();
      std::vector<ChannelScore> scores(n);
      parallel_for(n, common.jobs, [&](std::size_t c) {
        const Splits s = build_channel_splits(store, static_cast<int>(c));
        const ModelShape shape = ab_flags.shape(5, static_cast<int>(store.vocabulary.size()), Pooling::Average);
        const TrainConfig tcfg = ab_flags.config(common.seed);
        const TrainResult tr = train(s.train, s.validation, init_model(shape, common.seed), tcfg);
        scores[c] = ChannelScore{static_cast<int>(c), store.channels[c], evaluate(tr.model, s.train),
                                 evaluate(tr.model, s.validation), evaluate(tr.model, s.test)};
        if (common.verbose) {
          static std::mutex m;
          std::lock_guard lock(m);
          err << "[ablate] " << store.channels[c] << " test " << scores[c].test_accuracy << '\n';
        }
      });
      rank_channels(scores);
      const fs::path dir = ab_out;
      write_text_file(dir / "ablation.csv", ablation_csv(scores));
      write_text_file(dir / "ablation.md", ablation_markdown(scores));
      emit(dir / "ablation.csv");
      emit(dir / "ablation.md");
    } else if (report_cmd->parsed()) {
      for (const auto& p : write_report(rp_records, rp_out)) emit(p);
    }
  } catch (const Error& e) {
    err << "nsp: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Divergence:
      case ErrorKind::NonFinite:
        return kExitDivergence;
      case ErrorKind::MissingArtifact:
      case ErrorKind::CorruptFile:
        return dataset_stage ? kExitBadDataset : kExitMissingArtifact;
      case ErrorKind::ShapeMismatch:
        return dataset_stage ? kExitBadDataset : kExitConfig;
      case ErrorKind::Io:
        return kExitFailure;
      default:
        return kExitConfig;
    }
  } catch (const std::exception& e) {
    err << "nsp: internal error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace nsp::cli
