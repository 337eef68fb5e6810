#pragma once

#include <Eigen/Dense>

namespace nsp {

// Per-column z-scoring fitted on a reference matrix. Constant columns
// (std below 1e-12) are centered but not scaled, so they map to zero.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;  // 1 / std, or 1 for constant columns

  static Standardizer fit(const Eigen::MatrixXd& x);

  Eigen::Index dim() const { return mean.size(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

}  // namespace nsp
