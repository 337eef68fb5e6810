#pragma once

#include "nsp/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace nsp {

// Input weights are (H x D), recurrent weights (H x H).
struct GruParams {
  Eigen::MatrixXd w_z, w_r, w_h;
  Eigen::MatrixXd u_z, u_r, u_h;
  Eigen::VectorXd b_z, b_r, b_h;

  Eigen::Index hidden() const { return w_z.rows(); }
  Eigen::Index input_dim() const { return w_z.cols(); }
};

// One GRU update:
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   h~ = tanh(W_h x + U_h (r * h) + b_h)
//   h' = (1 - z) * h + z * h~
// Throws ShapeMismatch on inconsistent sizes.
Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev);

enum class Pooling { Average, Last };

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view name);

struct ModelShape {
  int input_dim = 0;
  int hidden = 128;
  int dense = 64;
  int classes = 4;
  Pooling pooling = Pooling::Average;
  double dropout_rate = 0.2;
};

// GRU -> pooling (mean of all h_t, or h_T) -> dense ReLU with dropout ->
// linear output -> softmax. The same struct doubles as the gradient type.
struct ModelParams {
  GruParams gru;
  Eigen::MatrixXd w_dense;  // dense x H
  Eigen::VectorXd b_dense;
  Eigen::MatrixXd w_out;    // classes x dense
  Eigen::VectorXd b_out;
  Pooling pooling = Pooling::Average;
  double dropout_rate = 0.2;

  template <class F, class... Ps>
  static void zip(F&& f, Ps&... ps) {
    f("gru.w_z", ps.gru.w_z...);
    f("gru.w_r", ps.gru.w_r...);
    f("gru.w_h", ps.gru.w_h...);
    f("gru.u_z", ps.gru.u_z...);
    f("gru.u_r", ps.gru.u_r...);
    f("gru.u_h", ps.gru.u_h...);
    f("gru.b_z", ps.gru.b_z...);
    f("gru.b_r", ps.gru.b_r...);
    f("gru.b_h", ps.gru.b_h...);
    f("dense.w", ps.w_dense...);
    f("dense.b", ps.b_dense...);
    f("out.w", ps.w_out...);
    f("out.b", ps.b_out...);
  }

  // Weights uniform in [-0.08, 0.08], biases zero.
  static ModelParams init(const ModelShape& shape, std::uint64_t seed);

  ModelShape shape() const;
  Eigen::Index input_dim() const { return gru.input_dim(); }
  Eigen::Index classes() const { return w_out.rows(); }
};

// Everything the backward pass needs from one forward pass. Hidden states
// are stored one column per step; column 0 of `h` is the zero initial state.
struct ForwardCache {
  Eigen::MatrixXd x;      // T x D
  Eigen::MatrixXd h;      // H x (T + 1)
  Eigen::MatrixXd z, r, candidate;  // H x T
  Eigen::VectorXd pooled, dense_pre, dropout_mask, dense_out;
};

struct ForwardResult {
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
  ForwardCache cache;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

// `x` is T x D. Inverted dropout on the dense output is active only when
// train_mode is set, drawing from `rng` (required in that case).
// Throws ShapeMismatch when D differs from the model input size.
ForwardResult forward(const ModelParams& m, const Eigen::MatrixXd& x, bool train_mode,
                      Rng* rng = nullptr);

// Backpropagation through time from a gradient on the logits.
ModelParams backward(const ModelParams& m, const ForwardCache& cache,
                     const Eigen::VectorXd& d_logits);

inline constexpr double kProbFloor = 1e-12;

// Cross entropy -log(max(p[label], 1e-12)) and, if `grads` is non-null,
// its gradient with respect to every parameter.
double loss_and_grads(const ModelParams& m, const Eigen::MatrixXd& x, int label,
                      ModelParams* grads, bool train_mode = false, Rng* rng = nullptr);

int predict(const ModelParams& m, const Eigen::MatrixXd& x);

}  // namespace nsp
