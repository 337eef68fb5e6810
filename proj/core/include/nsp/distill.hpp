#pragma once

#include "nsp/trainer.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace nsp {

struct DistillConfig {
  double temperature = 1.0;
  double lambda = 0.0;  // imitation weight on the soft loss
};

void validate(const DistillConfig& cfg);

// Raw teacher logits per training example id. Softening by a temperature
// happens at use, so one set serves every temperature.
struct SoftTargetSet {
  std::map<std::string, Eigen::VectorXd> logits;
};

// softmax(logits / T).
Eigen::VectorXd soften(const Eigen::VectorXd& logits, double temperature);

// Teacher on fused EEG+MFCC sequences; forces last-step pooling.
TrainResult train_teacher(const Split& fused_train, const Split& fused_val,
                          const ModelShape& shape, const TrainConfig& cfg);

// Inference-mode logits of `teacher` for every example in `split`.
SoftTargetSet soft_targets(const ModelParams& teacher, const Split& split);

struct StudentLoss {
  double total = 0.0;
  double hard = 0.0;
  double soft = 0.0;
};

// hard = -log softmax(student)[label]
// soft = -sum softmax(teacher/T) * log softmax(student/T)
// total = (1 - lambda) * hard + lambda * soft
// If d_logits is non-null it receives d total / d student_logits.
StudentLoss student_loss(const Eigen::VectorXd& student_logits, int label,
                         const Eigen::VectorXd& teacher_logits, const DistillConfig& cfg,
                         Eigen::VectorXd* d_logits = nullptr);

// Student on MFCC sequences against the teacher's soft targets, with the
// same architecture as the teacher (last-step pooling). The split ids must
// all have soft targets (MissingSoftTarget otherwise).
TrainResult train_student(const Split& mfcc_train, const Split& mfcc_val,
                          const SoftTargetSet& targets, const DistillConfig& dcfg,
                          const ModelShape& shape, const TrainConfig& tcfg);

struct SweepCell {
  DistillConfig config;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // temperature-major, in the order given
  std::size_t best = 0;          // highest validation accuracy, first on ties
};

struct MfccSplits {
  Split train, validation, test;
};

// One student per (T, lambda) pair, every one trained from the same seed.
// Cells are independent and are evaluated on up to `jobs` threads; the
// result does not depend on `jobs`.
SweepResult grid_sweep(const MfccSplits& data, const SoftTargetSet& targets,
                       const std::vector<double>& temperatures,
                       const std::vector<double>& lambdas, const ModelShape& shape,
                       const TrainConfig& tcfg, int jobs = 1);

inline const std::vector<double> kGridTemperatures{1.0, 2.0, 5.0, 10.0};
inline const std::vector<double> kGridLambdas{0.0, 0.2, 0.8, 1.0};

}  // namespace nsp
