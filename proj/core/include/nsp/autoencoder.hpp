#pragma once

#include "nsp/adam.hpp"
#include "nsp/standardizer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace nsp {

// Weights of a D -> hidden -> code -> hidden -> D autoencoder. Both hidden
// layers use tanh; the code layer and the reconstruction are linear.
// Weight matrices are (out x in).
struct AutoencoderParams {
  Eigen::MatrixXd w_enc1, w_enc2, w_dec1, w_dec2;
  Eigen::VectorXd b_enc1, b_enc2, b_dec1, b_dec2;

  template <class F, class... Ps>
  static void zip(F&& f, Ps&... ps) {
    f("w_enc1", ps.w_enc1...);
    f("b_enc1", ps.b_enc1...);
    f("w_enc2", ps.w_enc2...);
    f("b_enc2", ps.b_enc2...);
    f("w_dec1", ps.w_dec1...);
    f("b_dec1", ps.b_dec1...);
    f("w_dec2", ps.w_dec2...);
    f("b_dec2", ps.b_dec2...);
  }

  // Glorot-uniform weights, zero biases.
  static AutoencoderParams init(int input_dim, int hidden, int code, std::uint64_t seed);

  int input_dim() const { return static_cast<int>(w_enc1.cols()); }
  int code_dim() const { return static_cast<int>(w_enc2.rows()); }
};

struct AutoencoderModel {
  Standardizer standardizer;
  AutoencoderParams params;
  std::vector<double> loss_history;  // training MSE per epoch, before the update
};

struct AutoencoderOptions {
  int hidden = 64;
  int code = 6;
  AdamConfig adam{};
};

// Mean squared reconstruction error over all entries of `x` (already
// standardized) and its gradient.
double reconstruction_loss(const AutoencoderParams& p, const Eigen::MatrixXd& x,
                           AutoencoderParams* grads);

// Full-batch Adam on the reconstruction error of the standardized rows.
// Throws InsufficientSamples below 10 rows, Divergence if the loss turns
// non-finite.
AutoencoderModel autoencoder_fit(const Eigen::MatrixXd& x, int epochs, std::uint64_t seed,
                                 const AutoencoderOptions& opts = {});

// Code-layer activations (n x code).
Eigen::MatrixXd autoencoder_encode(const AutoencoderModel& m, const Eigen::MatrixXd& x);
// Reconstruction in the standardized input space.
Eigen::MatrixXd autoencoder_reconstruct(const AutoencoderModel& m, const Eigen::MatrixXd& x);

}  // namespace nsp
