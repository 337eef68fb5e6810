#include "nsp/gru_model.hpp"

#include "nsp/errors.hpp"

#include <cmath>
#include <string>

namespace nsp {

namespace {

constexpr double kInitRange = 0.08;

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

void fill_uniform(Eigen::MatrixXd& w, Rng& rng) {
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-kInitRange, kInitRange);
  }
}

void check_gru_shapes(const GruParams& p, Eigen::Index input_dim) {
  const Eigen::Index h = p.hidden();
  if (p.w_r.rows() != h || p.w_h.rows() != h || p.u_z.rows() != h || p.u_z.cols() != h ||
      p.u_r.rows() != h || p.u_r.cols() != h || p.u_h.rows() != h || p.u_h.cols() != h ||
      p.b_z.size() != h || p.b_r.size() != h || p.b_h.size() != h ||
      p.w_r.cols() != p.w_z.cols() || p.w_h.cols() != p.w_z.cols()) {
    fail(ErrorKind::ShapeMismatch, "GRU parameter shapes are inconsistent");
  }
  if (input_dim != p.input_dim()) {
    fail(ErrorKind::ShapeMismatch, "GRU expects input dim " + std::to_string(p.input_dim()) +
                                       ", got " + std::to_string(input_dim));
  }
}

}  // namespace

std::string_view to_string(Pooling p) { return p == Pooling::Average ? "average" : "last"; }

Pooling parse_pooling(std::string_view name) {
  if (name == "average" || name == "AVERAGE") return Pooling::Average;
  if (name == "last" || name == "LAST") return Pooling::Last;
  fail(ErrorKind::InvalidArgument, "unknown pooling mode '" + std::string(name) + "'");
}

Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev) {
  check_gru_shapes(p, x.size());
  if (h_prev.size() != p.hidden()) fail(ErrorKind::ShapeMismatch, "gru_step: hidden size mismatch");
  const Eigen::ArrayXd z = sigmoid((p.w_z * x + p.u_z * h_prev + p.b_z).array());
  const Eigen::ArrayXd r = sigmoid((p.w_r * x + p.u_r * h_prev + p.b_r).array());
  const Eigen::ArrayXd cand =
      (p.w_h * x + p.u_h * (r * h_prev.array()).matrix() + p.b_h).array().tanh();
  return ((1.0 - z) * h_prev.array() + z * cand).matrix();
}

ModelParams ModelParams::init(const ModelShape& shape, std::uint64_t seed) {
  if (shape.input_dim < 1 || shape.hidden < 1 || shape.dense < 1 || shape.classes < 2) {
    fail(ErrorKind::InvalidArgument, "ModelParams::init: invalid shape");
  }
  if (!(shape.dropout_rate >= 0.0 && shape.dropout_rate < 1.0)) {
    fail(ErrorKind::InvalidArgument, "ModelParams::init: dropout must be in [0, 1)");
  }
  const Eigen::Index h = shape.hidden;
  const Eigen::Index d = shape.input_dim;
  ModelParams m;
  m.gru.w_z.resize(h, d);
  m.gru.w_r.resize(h, d);
  m.gru.w_h.resize(h, d);
  m.gru.u_z.resize(h, h);
  m.gru.u_r.resize(h, h);
  m.gru.u_h.resize(h, h);
  m.gru.b_z = Eigen::VectorXd::Zero(h);
  m.gru.b_r = Eigen::VectorXd::Zero(h);
  m.gru.b_h = Eigen::VectorXd::Zero(h);
  m.w_dense.resize(shape.dense, h);
  m.b_dense = Eigen::VectorXd::Zero(shape.dense);
  m.w_out.resize(shape.classes, shape.dense);
  m.b_out = Eigen::VectorXd::Zero(shape.classes);
  m.pooling = shape.pooling;
  m.dropout_rate = shape.dropout_rate;

  Rng rng(seed);
  for (Eigen::MatrixXd* w : {&m.gru.w_z, &m.gru.w_r, &m.gru.w_h, &m.gru.u_z, &m.gru.u_r,
                             &m.gru.u_h, &m.w_dense, &m.w_out}) {
    fill_uniform(*w, rng);
  }
  return m;
}

ModelShape ModelParams::shape() const {
  return ModelShape{static_cast<int>(gru.input_dim()), static_cast<int>(gru.hidden()),
                    static_cast<int>(w_dense.rows()), static_cast<int>(w_out.rows()), pooling,
                    dropout_rate};
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

ForwardResult forward(const ModelParams& m, const Eigen::MatrixXd& x, bool train_mode, Rng* rng) {
  check_gru_shapes(m.gru, x.cols());
  if (x.rows() < 1) fail(ErrorKind::ShapeMismatch, "forward: empty sequence");
  if (train_mode && m.dropout_rate > 0.0 && rng == nullptr) {
    fail(ErrorKind::InvalidArgument, "forward: train mode needs an rng for dropout");
  }

  const Eigen::Index steps = x.rows();
  const Eigen::Index hid = m.gru.hidden();
  ForwardResult res;
  ForwardCache& c = res.cache;
  c.x = x;
  c.h.resize(hid, steps + 1);
  c.h.col(0).setZero();
  c.z.resize(hid, steps);
  c.r.resize(hid, steps);
  c.candidate.resize(hid, steps);

  // Input projections for all steps at once: H x T.
  const Eigen::MatrixXd xz = (m.gru.w_z * x.transpose()).colwise() + m.gru.b_z;
  const Eigen::MatrixXd xr = (m.gru.w_r * x.transpose()).colwise() + m.gru.b_r;
  const Eigen::MatrixXd xh = (m.gru.w_h * x.transpose()).colwise() + m.gru.b_h;

  Eigen::VectorXd tmp(hid);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto h_prev = c.h.col(t);
    tmp.noalias() = m.gru.u_z * h_prev;
    c.z.col(t) = sigmoid((xz.col(t) + tmp).array());
    tmp.noalias() = m.gru.u_r * h_prev;
    c.r.col(t) = sigmoid((xr.col(t) + tmp).array());
    const Eigen::VectorXd gated = c.r.col(t).cwiseProduct(h_prev);
    tmp.noalias() = m.gru.u_h * gated;
    c.candidate.col(t) = (xh.col(t) + tmp).array().tanh();
    c.h.col(t + 1) = (1.0 - c.z.col(t).array()) * h_prev.array() +
                     c.z.col(t).array() * c.candidate.col(t).array();
  }

  if (m.pooling == Pooling::Average) {
    c.pooled = c.h.rightCols(steps).rowwise().mean();
  } else {
    c.pooled = c.h.col(steps);
  }

  c.dense_pre = m.w_dense * c.pooled + m.b_dense;
  c.dropout_mask = Eigen::VectorXd::Ones(c.dense_pre.size());
  if (train_mode && m.dropout_rate > 0.0) {
    const double keep = 1.0 - m.dropout_rate;
    for (Eigen::Index i = 0; i < c.dropout_mask.size(); ++i) {
      c.dropout_mask(i) = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    }
  }
  c.dense_out = c.dense_pre.cwiseMax(0.0).cwiseProduct(c.dropout_mask);
  res.logits = m.w_out * c.dense_out + m.b_out;
  res.probs = softmax(res.logits);
  return res;
}

ModelParams backward(const ModelParams& m, const ForwardCache& c, const Eigen::VectorXd& d_logits) {
  const Eigen::Index steps = c.x.rows();
  const Eigen::Index hid = m.gru.hidden();
  ModelParams g;
  g.pooling = m.pooling;
  g.dropout_rate = m.dropout_rate;

  g.w_out = d_logits * c.dense_out.transpose();
  g.b_out = d_logits;
  const Eigen::VectorXd d_dense_out = m.w_out.transpose() * d_logits;
  Eigen::VectorXd d_pre = d_dense_out.cwiseProduct(c.dropout_mask);
  for (Eigen::Index i = 0; i < d_pre.size(); ++i) {
    if (!(c.dense_pre(i) > 0.0)) d_pre(i) = 0.0;
  }
  g.w_dense = d_pre * c.pooled.transpose();
  g.b_dense = d_pre;
  const Eigen::VectorXd d_pooled = m.w_dense.transpose() * d_pre;

  // Gradients w.r.t. gate pre-activations, one column per step.
  Eigen::MatrixXd da_z(hid, steps), da_r(hid, steps), da_h(hid, steps);
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(hid);
  const Eigen::VectorXd d_pool_step =
      m.pooling == Pooling::Average ? Eigen::VectorXd(d_pooled / static_cast<double>(steps))
                                    : d_pooled;

  Eigen::VectorXd dh(hid), d_gated(hid);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    dh = carry;
    if (m.pooling == Pooling::Average || t == steps - 1) dh += d_pool_step;

    const auto h_prev = c.h.col(t);
    const auto z = c.z.col(t).array();
    const auto r = c.r.col(t).array();
    const auto cand = c.candidate.col(t).array();

    da_h.col(t) = dh.array() * z * (1.0 - cand.square());
    da_z.col(t) = dh.array() * (cand - h_prev.array()) * z * (1.0 - z);
    carry = dh.array() * (1.0 - z);

    d_gated.noalias() = m.gru.u_h.transpose() * da_h.col(t);
    da_r.col(t) = d_gated.array() * h_prev.array() * r * (1.0 - r);
    carry.array() += d_gated.array() * r;
    carry.noalias() += m.gru.u_r.transpose() * da_r.col(t);
    carry.noalias() += m.gru.u_z.transpose() * da_z.col(t);
  }

  const auto h_prevs = c.h.leftCols(steps);
  g.gru.w_z.noalias() = da_z * c.x;
  g.gru.w_r.noalias() = da_r * c.x;
  g.gru.w_h.noalias() = da_h * c.x;
  g.gru.u_z.noalias() = da_z * h_prevs.transpose();
  g.gru.u_r.noalias() = da_r * h_prevs.transpose();
  const Eigen::MatrixXd gated_prevs = c.r.cwiseProduct(h_prevs);
  g.gru.u_h.noalias() = da_h * gated_prevs.transpose();
  g.gru.b_z = da_z.rowwise().sum();
  g.gru.b_r = da_r.rowwise().sum();
  g.gru.b_h = da_h.rowwise().sum();
  return g;
}

double loss_and_grads(const ModelParams& m, const Eigen::MatrixXd& x, int label,
                      ModelParams* grads, bool train_mode, Rng* rng) {
  if (label < 0 || label >= m.classes()) {
    fail(ErrorKind::InvalidArgument, "loss_and_grads: label " + std::to_string(label) +
                                         " out of range");
  }
  const ForwardResult fr = forward(m, x, train_mode, rng);
  const double loss = -std::log(std::max(fr.probs(label), kProbFloor));
  if (grads != nullptr) {
    Eigen::VectorXd d_logits = fr.probs;
    d_logits(label) -= 1.0;
    *grads = backward(m, fr.cache, d_logits);
  }
  return loss;
}

int predict(const ModelParams& m, const Eigen::MatrixXd& x) {
  const ForwardResult fr = forward(m, x, false);
  Eigen::Index arg = 0;
  fr.logits.maxCoeff(&arg);
  return static_cast<int>(arg);
}

}  // namespace nsp
