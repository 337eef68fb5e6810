#pragma once

#include "nsp/standardizer.hpp"

#include <Eigen/Dense>

namespace nsp {

// Polynomial kernel k(x, y) = (x . y + coef0)^degree.
struct PolynomialKernel {
  int degree = 3;
  double coef0 = 1.0;

  Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;
};

// Kernel PCA fitted on standardized rows.
//
// `eigenvalues` holds the full spectrum of the double-centered kernel matrix
// in descending order with negative round-off clamped to zero. Column i of
// `alphas` is the i-th eigenvector scaled so alpha' Kc alpha = 1 (zero when
// the eigenvalue is zero).
struct KpcaModel {
  PolynomialKernel kernel;
  Standardizer standardizer;
  Eigen::MatrixXd x_fit;            // standardized fit rows, n x D
  Eigen::VectorXd eigenvalues;      // n, descending
  Eigen::MatrixXd alphas;           // n x n_components
  Eigen::RowVectorXd kernel_col_means;
  double kernel_grand_mean = 0.0;
  Eigen::MatrixXd train_scores;     // n x n_components

  Eigen::Index n_components() const { return alphas.cols(); }
  Eigen::Index input_dim() const { return x_fit.cols(); }
};

// Throws InsufficientSamples unless rows >= n_components >= 1.
KpcaModel kpca_fit(const Eigen::MatrixXd& x, int n_components,
                   PolynomialKernel kernel = {});

// Projects new rows through the centered cross-kernel against the fit rows.
// Throws ShapeMismatch when the column count differs from the fit data.
Eigen::MatrixXd kpca_transform(const KpcaModel& m, const Eigen::MatrixXd& x_new);

// Cumulative explained-variance ratios over the full eigen-spectrum.
// Throws Degenerate when every eigenvalue is zero.
Eigen::VectorXd explained_variance_curve(const KpcaModel& m);
Eigen::VectorXd explained_variance_curve(const Eigen::VectorXd& eigenvalues);

}  // namespace nsp
