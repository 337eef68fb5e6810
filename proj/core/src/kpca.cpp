#include "nsp/kpca.hpp"

#include "nsp/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace nsp {

Eigen::MatrixXd PolynomialKernel::gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd g = a * b.transpose();
  g.array() += coef0;
  if (degree != 1) g = g.array().pow(static_cast<double>(degree)).matrix();
  return g;
}

KpcaModel kpca_fit(const Eigen::MatrixXd& x, int n_components, PolynomialKernel kernel) {
  const Eigen::Index n = x.rows();
  if (n_components < 1 || n < n_components) {
    fail(ErrorKind::InsufficientSamples, "kpca_fit: need rows >= n_components >= 1, got " +
                                             std::to_string(n) + " rows for " +
                                             std::to_string(n_components) + " components");
  }
  if (kernel.degree < 1) fail(ErrorKind::InvalidArgument, "kpca_fit: degree must be >= 1");
  if (!x.allFinite()) fail(ErrorKind::NonFinite, "kpca_fit: non-finite input");

  KpcaModel m;
  m.kernel = kernel;
  m.standardizer = Standardizer::fit(x);
  m.x_fit = m.standardizer.apply(x);

  Eigen::MatrixXd k = kernel.gram(m.x_fit, m.x_fit);
  // Symmetrize exactly; a*a' can differ from its transpose in the last bit.
  k = (0.5 * (k + k.transpose())).eval();
  m.kernel_col_means = k.colwise().mean();
  m.kernel_grand_mean = m.kernel_col_means.mean();

  // Kc = K - 1K - K1 + 1K1
  Eigen::MatrixXd kc = k;
  kc.rowwise() -= m.kernel_col_means;
  kc.colwise() -= m.kernel_col_means.transpose();
  kc.array() += m.kernel_grand_mean;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kc);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::Degenerate, "kpca_fit: eigendecomposition did not converge");
  }
  // Eigen returns ascending order.
  const Eigen::VectorXd ascending = solver.eigenvalues();
  m.eigenvalues = ascending.reverse().cwiseMax(0.0);

  m.alphas.resize(n, n_components);
  for (int i = 0; i < n_components; ++i) {
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - i);
    // Fix the sign so the largest-magnitude entry is positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    const double lambda = m.eigenvalues(i);
    m.alphas.col(i) = lambda > 0.0 ? Eigen::VectorXd(v / std::sqrt(lambda))
                                   : Eigen::VectorXd::Zero(n);
  }
  m.train_scores = kc * m.alphas;
  return m;
}

Eigen::MatrixXd kpca_transform(const KpcaModel& m, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != m.input_dim()) {
    fail(ErrorKind::ShapeMismatch, "kpca_transform: expected " + std::to_string(m.input_dim()) +
                                       " columns, got " + std::to_string(x_new.cols()));
  }
  const Eigen::MatrixXd xs = m.standardizer.apply(x_new);
  Eigen::MatrixXd k = m.kernel.gram(xs, m.x_fit);
  const Eigen::VectorXd row_means = k.rowwise().mean();
  k.rowwise() -= m.kernel_col_means;
  k.colwise() -= row_means;
  k.array() += m.kernel_grand_mean;
  return k * m.alphas;
}

Eigen::VectorXd explained_variance_curve(const Eigen::VectorXd& eigenvalues) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) total += eigenvalues(i);
  if (!(total > 0.0)) {
    fail(ErrorKind::Degenerate, "explained_variance_curve: all eigenvalues are zero");
  }
  Eigen::VectorXd curve(eigenvalues.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    acc += eigenvalues(i);
    curve(i) = acc / total;
  }
  return curve;
}

Eigen::VectorXd explained_variance_curve(const KpcaModel& m) {
  return explained_variance_curve(m.eigenvalues);
}

}  // namespace nsp
