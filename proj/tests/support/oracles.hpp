#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Each one is written from the textbook formula without reusing the library
// code path it checks.

#include "nsp/distill.hpp"
#include "nsp/gru_model.hpp"
#include "nsp/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace nsp::oracle {

// |X_k|^2 for k = 0..n/2 by the O(n^2) DFT sum.
inline std::vector<double> direct_periodogram(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n / 2 + 1, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      re += x[t] * std::cos(a);
      im += x[t] * std::sin(a);
    }
    p[k] = re * re + im * im;
  }
  return p;
}

inline double entropy_of(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) h -= (w / total) * std::log(w / total);
  }
  return h;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues in descending order with matching eigenvector columns.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  Eigen::VectorXd vals(n);
  Eigen::MatrixXd vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vals(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {vals, vecs};
}

// Classical PCA scores of the centered rows of `x` (covariance eigenvectors).
inline Eigen::MatrixXd pca_scores(const Eigen::MatrixXd& x, int components) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const auto [vals, vecs] = jacobi_eigen(c.transpose() * c);
  return c * vecs.leftCols(components);
}

// Worst relative error between analytic and central-difference gradients.
struct GradCheck {
  double worst = 0.0;
  std::string where;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-7);
  return std::abs(analytic - numeric) / denom;
}

// `loss(params)` evaluates the objective, `analytic` holds its gradient.
template <typename Params, typename LossFn>
GradCheck finite_difference_check(const Params& params, const Params& analytic, LossFn&& loss,
                                  double step = 1e-5) {
  GradCheck out;
  Params probe = params;
  std::vector<std::pair<std::string, std::vector<double>>> grads;
  Params::zip([&](const char* name, const auto& g) {
    grads.emplace_back(name, std::vector<double>(g.data(), g.data() + g.size()));
  }, analytic);
  std::size_t tensor = 0;
  Params::zip([&](const char* name, auto& p) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + step;
      const double up = loss(probe);
      p.data()[i] = saved - step;
      const double down = loss(probe);
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(grads[tensor].second[static_cast<std::size_t>(i)], numeric);
      if (err > out.worst) {
        out.worst = err;
        out.where = std::string(name) + "[" + std::to_string(i) + "]";
      }
    }
    ++tensor;
  }, probe);
  return out;
}

// Toy GRU classifier with O(1) random weights so every gradient path is
// exercised away from zero.
inline ModelParams toy_model(int input_dim, int hidden, int dense, int classes, Pooling pooling,
                             std::uint64_t seed) {
  ModelShape shape;
  shape.input_dim = input_dim;
  shape.hidden = hidden;
  shape.dense = dense;
  shape.classes = classes;
  shape.pooling = pooling;
  shape.dropout_rate = 0.0;
  ModelParams m = ModelParams::init(shape, seed);
  Rng rng(seed + 1);
  ModelParams::zip([&](const char*, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0, 0.6);
  }, m);
  return m;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                     double scale = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
  return m;
}

// Student-loss gradient check through the whole model: the objective is
// student_loss(forward(params, x).logits, label, teacher_logits).
inline GradCheck student_gradient_check(const ModelParams& m, const Eigen::MatrixXd& x, int label,
                                        const Eigen::VectorXd& teacher, const DistillConfig& cfg) {
  const ForwardResult fr = forward(m, x, false);
  Eigen::VectorXd d_logits;
  student_loss(fr.logits, label, teacher, cfg, &d_logits);
  const ModelParams analytic = backward(m, fr.cache, d_logits);
  return finite_difference_check(m, analytic, [&](const ModelParams& p) {
    return student_loss(forward(p, x, false).logits, label, teacher, cfg).total;
  });
}

inline GradCheck model_gradient_check(const ModelParams& m, const Eigen::MatrixXd& x, int label) {
  ModelParams analytic = m;
  loss_and_grads(m, x, label, &analytic);
  return finite_difference_check(m, analytic, [&](const ModelParams& p) {
    return loss_and_grads(p, x, label, nullptr);
  });
}

// Steady-state amplitude of a filtered unit sinusoid, measured by
// projecting the last `tail` samples onto sin/cos at the test frequency.
inline double sinusoid_amplitude(const Eigen::VectorXd& y, double freq_hz, double fs_hz,
                                 Eigen::Index tail) {
  double s = 0.0, c = 0.0;
  const Eigen::Index start = y.size() - tail;
  for (Eigen::Index n = start; n < y.size(); ++n) {
    const double a = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(n) / fs_hz;
    s += y(n) * std::sin(a);
    c += y(n) * std::cos(a);
  }
  return 2.0 * std::sqrt(s * s + c * c) / static_cast<double>(tail);
}

}  // namespace nsp::oracle
