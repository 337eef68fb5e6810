#include "nsp/distill.hpp"

#include "nsp/errors.hpp"
#include "nsp/parallel.hpp"

#include <cmath>

namespace nsp {

void validate(const DistillConfig& cfg) {
  if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature)) {
    fail(ErrorKind::InvalidArgument, "distillation temperature must be positive");
  }
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "distillation lambda must lie in [0, 1]");
  }
}

Eigen::VectorXd soften(const Eigen::VectorXd& logits, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorKind::InvalidArgument, "soften: temperature must be > 0");
  return softmax(logits / temperature);
}

TrainResult train_teacher(const Split& fused_train, const Split& fused_val,
                          const ModelShape& shape, const TrainConfig& cfg) {
  ModelShape s = shape;
  s.pooling = Pooling::Last;
  return train(fused_train, fused_val, init_model(s, cfg.seed), cfg);
}

SoftTargetSet soft_targets(const ModelParams& teacher, const Split& split) {
  SoftTargetSet out;
  for (const auto& ex : split) {
    if (!out.logits.emplace(ex.id, forward(teacher, ex.features, false).logits).second) {
      fail(ErrorKind::IdMismatch, "soft_targets: duplicate example id '" + ex.id + "'");
    }
  }
  return out;
}

StudentLoss student_loss(const Eigen::VectorXd& student_logits, int label,
                         const Eigen::VectorXd& teacher_logits, const DistillConfig& cfg,
                         Eigen::VectorXd* d_logits) {
  if (student_logits.size() != teacher_logits.size()) {
    fail(ErrorKind::ShapeMismatch, "student_loss: student and teacher logit sizes differ");
  }
  if (label < 0 || label >= student_logits.size()) {
    fail(ErrorKind::InvalidArgument, "student_loss: label out of range");
  }
  const double t = cfg.temperature;
  const Eigen::VectorXd probs = softmax(student_logits);
  const Eigen::VectorXd target = soften(teacher_logits, t);
  const Eigen::VectorXd student_log_soft = log_softmax(student_logits / t);

  StudentLoss l;
  l.hard = -std::log(std::max(probs(label), kProbFloor));
  l.soft = -target.dot(student_log_soft);
  l.total = (1.0 - cfg.lambda) * l.hard + cfg.lambda * l.soft;

  if (d_logits != nullptr) {
    Eigen::VectorXd d_hard = probs;
    d_hard(label) -= 1.0;
    const Eigen::VectorXd d_soft = (student_log_soft.array().exp() - target.array()).matrix() / t;
    *d_logits = (1.0 - cfg.lambda) * d_hard + cfg.lambda * d_soft;
  }
  return l;
}

TrainResult train_student(const Split& mfcc_train, const Split& mfcc_val,
                          const SoftTargetSet& targets, const DistillConfig& dcfg,
                          const ModelShape& shape, const TrainConfig& tcfg) {
  validate(dcfg);
  std::vector<const Eigen::VectorXd*> teacher(mfcc_train.size());
  for (std::size_t i = 0; i < mfcc_train.size(); ++i) {
    const auto it = targets.logits.find(mfcc_train[i].id);
    if (it == targets.logits.end()) {
      fail(ErrorKind::MissingSoftTarget, "no soft target for training example '" +
                                             mfcc_train[i].id + "'");
    }
    teacher[i] = &it->second;
  }
  ModelShape s = shape;
  s.pooling = Pooling::Last;
  const LogitLoss loss = [&](std::size_t index, int label, const Eigen::VectorXd& logits,
                             Eigen::VectorXd& d_logits) {
    return student_loss(logits, label, *teacher[index], dcfg, &d_logits).total;
  };
  return train(mfcc_train, mfcc_val, init_model(s, tcfg.seed), tcfg, loss);
}

SweepResult grid_sweep(const MfccSplits& data, const SoftTargetSet& targets,
                       const std::vector<double>& temperatures,
                       const std::vector<double>& lambdas, const ModelShape& shape,
                       const TrainConfig& tcfg, int jobs) {
  if (temperatures.empty() || lambdas.empty()) {
    fail(ErrorKind::InvalidArgument, "grid_sweep: temperature and lambda lists must be non-empty");
  }
  SweepResult res;
  for (double t : temperatures) {
    for (double l : lambdas) {
      SweepCell cell;
      cell.config = DistillConfig{t, l};
      validate(cell.config);
      res.cells.push_back(cell);
    }
  }
  parallel_for(res.cells.size(), jobs, [&](std::size_t i) {
    SweepCell& cell = res.cells[i];
    const TrainResult tr =
        train_student(data.train, data.validation, targets, cell.config, shape, tcfg);
    cell.train_accuracy = evaluate(tr.model, data.train);
    cell.val_accuracy = evaluate(tr.model, data.validation);
    cell.test_accuracy = evaluate(tr.model, data.test);
  });
  for (std::size_t i = 1; i < res.cells.size(); ++i) {
    if (res.cells[i].val_accuracy > res.cells[res.best].val_accuracy) res.best = i;
  }
  return res;
}

}  // namespace nsp
