#include "nsp/standardizer.hpp"

#include "nsp/errors.hpp"

#include <cmath>

namespace nsp {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) fail(ErrorKind::InsufficientSamples, "Standardizer::fit: empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  const Eigen::MatrixXd centered = x.rowwise() - s.mean;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(x.rows()));
    s.scale(j) = sd < 1e-12 ? 1.0 : 1.0 / sd;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    fail(ErrorKind::ShapeMismatch, "Standardizer: expected " + std::to_string(mean.size()) +
                                       " columns, got " + std::to_string(x.cols()));
  }
  return (x.rowwise() - mean).array().rowwise() * scale.array();
}

}  // namespace nsp
