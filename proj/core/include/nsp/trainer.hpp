#pragma once

#include "nsp/adam.hpp"
#include "nsp/gru_model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nsp {

struct Example {
  std::string id;
  Eigen::MatrixXd features;  // T x D
  int label = 0;
};

using Split = std::vector<Example>;

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean training-mode loss over the epoch
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int epochs = 10000;
  int batch_size = 1;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Called after every epoch, e.g. for progress output.
  std::function<void(const EpochRecord&)> on_epoch;

  AdamConfig adam() const { return AdamConfig{learning_rate, beta1, beta2, epsilon}; }
};

struct TrainResult {
  ModelParams model;
  std::vector<EpochRecord> history;
};

// Per-example objective: given the index of the example in the training
// split, its label and the logits, return the loss and write dLoss/dlogits.
using LogitLoss = std::function<double(std::size_t index, int label, const Eigen::VectorXd& logits,
                                       Eigen::VectorXd& d_logits)>;

// Cross entropy on the softmax of the logits, floored at 1e-12.
double cross_entropy_loss(std::size_t index, int label, const Eigen::VectorXd& logits,
                          Eigen::VectorXd& d_logits);

// Batch-size-1 Adam over a reshuffled training order each epoch. All
// randomness comes from cfg.seed via the "shuffle" and "dropout" substreams;
// `model` is the initial state (see ModelParams::init with the "init" stream).
// Throws EmptySplit, ShapeMismatch, or Divergence on a non-finite loss or
// gradient.
TrainResult train(const Split& train_split, const Split& val_split, ModelParams model,
                  const TrainConfig& cfg, const LogitLoss& loss = cross_entropy_loss);

// Initial parameters for a run seeded by `seed`.
ModelParams init_model(const ModelShape& shape, std::uint64_t seed);

// Fraction of argmax predictions equal to the label, dropout disabled.
// Throws EmptySplit.
double evaluate(const ModelParams& m, const Split& split);

// Mean cross entropy in inference mode. Throws EmptySplit.
double mean_loss(const ModelParams& m, const Split& split);

}  // namespace nsp
