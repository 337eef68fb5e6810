#include "nsp/autoencoder.hpp"

#include "nsp/errors.hpp"
#include "nsp/rng.hpp"

#include <cmath>

namespace nsp {

namespace {

void glorot(Eigen::MatrixXd& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
  }
}

struct Activations {
  Eigen::MatrixXd h1, code, h2, out;
};

Activations run(const AutoencoderParams& p, const Eigen::MatrixXd& x) {
  Activations a;
  a.h1 = ((x * p.w_enc1.transpose()).rowwise() + p.b_enc1.transpose()).array().tanh();
  a.code = (a.h1 * p.w_enc2.transpose()).rowwise() + p.b_enc2.transpose();
  a.h2 = ((a.code * p.w_dec1.transpose()).rowwise() + p.b_dec1.transpose()).array().tanh();
  a.out = (a.h2 * p.w_dec2.transpose()).rowwise() + p.b_dec2.transpose();
  return a;
}

}  // namespace

AutoencoderParams AutoencoderParams::init(int input_dim, int hidden, int code,
                                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, "autoencoder/init"));
  AutoencoderParams p;
  p.w_enc1.resize(hidden, input_dim);
  p.w_enc2.resize(code, hidden);
  p.w_dec1.resize(hidden, code);
  p.w_dec2.resize(input_dim, hidden);
  glorot(p.w_enc1, rng);
  glorot(p.w_enc2, rng);
  glorot(p.w_dec1, rng);
  glorot(p.w_dec2, rng);
  p.b_enc1 = Eigen::VectorXd::Zero(hidden);
  p.b_enc2 = Eigen::VectorXd::Zero(code);
  p.b_dec1 = Eigen::VectorXd::Zero(hidden);
  p.b_dec2 = Eigen::VectorXd::Zero(input_dim);
  return p;
}

double reconstruction_loss(const AutoencoderParams& p, const Eigen::MatrixXd& x,
                           AutoencoderParams* grads) {
  if (x.cols() != p.input_dim()) {
    fail(ErrorKind::ShapeMismatch, "autoencoder: expected " + std::to_string(p.input_dim()) +
                                       " columns, got " + std::to_string(x.cols()));
  }
  const Activations a = run(p, x);
  const Eigen::MatrixXd diff = a.out - x;
  const double count = static_cast<double>(x.size());
  const double loss = diff.squaredNorm() / count;
  if (grads == nullptr) return loss;

  const Eigen::MatrixXd d_out = (2.0 / count) * diff;
  grads->w_dec2 = d_out.transpose() * a.h2;
  grads->b_dec2 = d_out.colwise().sum().transpose();
  const Eigen::MatrixXd d_h2 =
      ((d_out * p.w_dec2).array() * (1.0 - a.h2.array().square())).matrix();
  grads->w_dec1 = d_h2.transpose() * a.code;
  grads->b_dec1 = d_h2.colwise().sum().transpose();
  const Eigen::MatrixXd d_code = d_h2 * p.w_dec1;
  grads->w_enc2 = d_code.transpose() * a.h1;
  grads->b_enc2 = d_code.colwise().sum().transpose();
  const Eigen::MatrixXd d_h1 =
      ((d_code * p.w_enc2).array() * (1.0 - a.h1.array().square())).matrix();
  grads->w_enc1 = d_h1.transpose() * x;
  grads->b_enc1 = d_h1.colwise().sum().transpose();
  return loss;
}

AutoencoderModel autoencoder_fit(const Eigen::MatrixXd& x, int epochs, std::uint64_t seed,
                                 const AutoencoderOptions& opts) {
  if (x.rows() < 10) {
    fail(ErrorKind::InsufficientSamples, "autoencoder_fit: need at least 10 rows, got " +
                                             std::to_string(x.rows()));
  }
  if (epochs < 1) fail(ErrorKind::InvalidArgument, "autoencoder_fit: epochs must be >= 1");

  AutoencoderModel m;
  m.standardizer = Standardizer::fit(x);
  const Eigen::MatrixXd xs = m.standardizer.apply(x);
  m.params = AutoencoderParams::init(static_cast<int>(x.cols()), opts.hidden, opts.code, seed);

  auto state = AdamState<AutoencoderParams>::zeros_like(m.params);
  AutoencoderParams grads = m.params;
  m.loss_history.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double loss = reconstruction_loss(m.params, xs, &grads);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::Divergence, "autoencoder_fit: loss became non-finite at epoch " +
                                      std::to_string(epoch));
    }
    m.loss_history.push_back(loss);
    try {
      adam_step(state, m.params, grads, opts.adam);
    } catch (const Error& e) {
      fail(ErrorKind::Divergence, std::string("autoencoder_fit: ") + e.what());
    }
  }
  return m;
}

Eigen::MatrixXd autoencoder_encode(const AutoencoderModel& m, const Eigen::MatrixXd& x) {
  if (x.cols() != m.params.input_dim()) {
    fail(ErrorKind::ShapeMismatch, "autoencoder_encode: expected " +
                                       std::to_string(m.params.input_dim()) + " columns");
  }
  return run(m.params, m.standardizer.apply(x)).code;
}

Eigen::MatrixXd autoencoder_reconstruct(const AutoencoderModel& m, const Eigen::MatrixXd& x) {
  return run(m.params, m.standardizer.apply(x)).out;
}

}  // namespace nsp
