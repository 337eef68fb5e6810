#include "nsp/trainer.hpp"

#include "nsp/errors.hpp"

#include <cmath>
#include <numeric>

namespace nsp {

namespace {

void require_non_empty(const Split& s, const char* name) {
  if (s.empty()) fail(ErrorKind::EmptySplit, std::string(name) + " split is empty");
}

void require_dims(const Split& s, const ModelParams& m, const char* name) {
  for (const auto& ex : s) {
    if (ex.features.cols() != m.input_dim()) {
      fail(ErrorKind::ShapeMismatch, std::string(name) + " example '" + ex.id + "' has dim " +
                                         std::to_string(ex.features.cols()) + ", model expects " +
                                         std::to_string(m.input_dim()));
    }
    if (ex.label < 0 || ex.label >= m.classes()) {
      fail(ErrorKind::InvalidArgument, std::string(name) + " example '" + ex.id +
                                           "' has label out of range");
    }
  }
}

}  // namespace

double cross_entropy_loss(std::size_t, int label, const Eigen::VectorXd& logits,
                          Eigen::VectorXd& d_logits) {
  const Eigen::VectorXd probs = softmax(logits);
  d_logits = probs;
  d_logits(label) -= 1.0;
  return -std::log(std::max(probs(label), kProbFloor));
}

ModelParams init_model(const ModelShape& shape, std::uint64_t seed) {
  return ModelParams::init(shape, derive_seed(seed, "init"));
}

TrainResult train(const Split& train_split, const Split& val_split, ModelParams model,
                  const TrainConfig& cfg, const LogitLoss& loss) {
  require_non_empty(train_split, "training");
  require_non_empty(val_split, "validation");
  require_dims(train_split, model, "training");
  require_dims(val_split, model, "validation");
  if (cfg.epochs < 0) fail(ErrorKind::InvalidArgument, "train: epochs must be >= 0");
  if (cfg.batch_size != 1) fail(ErrorKind::InvalidArgument, "train: only batch size 1 is supported");
  if (!(cfg.learning_rate > 0.0)) fail(ErrorKind::InvalidArgument, "train: learning rate must be > 0");

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
  const AdamConfig adam = cfg.adam();
  auto state = AdamState<ModelParams>::zeros_like(model);

  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  Eigen::VectorXd d_logits;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t idx : order) {
      const Example& ex = train_split[idx];
      const ForwardResult fr = forward(model, ex.features, true, &dropout_rng);
      const double l = loss(idx, ex.label, fr.logits, d_logits);
      if (!std::isfinite(l)) {
        fail(ErrorKind::Divergence, "train: non-finite loss at epoch " + std::to_string(epoch) +
                                        " on example '" + ex.id + "'");
      }
      loss_sum += l;
      const ModelParams grads = backward(model, fr.cache, d_logits);
      try {
        adam_step(state, model, grads, adam);
      } catch (const Error& e) {
        fail(ErrorKind::Divergence, "train: epoch " + std::to_string(epoch) + ", example '" +
                                        ex.id + "': " + e.what());
      }
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = loss_sum / static_cast<double>(train_split.size());
    rec.train_accuracy = evaluate(model, train_split);
    rec.val_loss = mean_loss(model, val_split);
    rec.val_accuracy = evaluate(model, val_split);
    result.history.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);
  }
  result.model = std::move(model);
  return result;
}

double evaluate(const ModelParams& m, const Split& split) {
  require_non_empty(split, "evaluation");
  std::size_t correct = 0;
  for (const auto& ex : split) {
    if (predict(m, ex.features) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

double mean_loss(const ModelParams& m, const Split& split) {
  require_non_empty(split, "evaluation");
  double sum = 0.0;
  for (const auto& ex : split) sum += loss_and_grads(m, ex.features, ex.label, nullptr);
  return sum / static_cast<double>(split.size());
}

}  // namespace nsp
