#include "pdo/det/determinant.hpp"

#include <cmath>

namespace pdo::det {

SurrogateKernel surrogate(const Eigen::MatrixXd& kernel, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("surrogate: beta must be in (0,1)");
  if (kernel.rows() != kernel.cols()) throw std::invalid_argument("surrogate: kernel not square");
  SurrogateKernel out;
  out.beta = beta;
  out.entries = beta * kernel;
  out.entries.diagonal().array() += 1.0 - beta;
  return out;
}

SurrogateKernel surrogate(const kernels::KernelMatrix& kernel, double beta) {
  return surrogate(kernel.entries, beta);
}

CholeskyFactor cholesky(const Eigen::MatrixXd& a, double pivot_tolerance) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky: matrix not square");
  CholeskyFactor f;
  f.lower = Eigen::MatrixXd::Zero(n, n);
  auto& l = f.lower;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > pivot_tolerance)) {
      throw NotPositiveDefinite("cholesky: non-positive pivot at column " + std::to_string(j));
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / diag;
    }
  }
  return f;
}

double det_via_cholesky(const CholeskyFactor& factor) {
  double prod = 1.0;
  for (Eigen::Index i = 0; i < factor.lower.rows(); ++i) prod *= factor.lower(i, i);
  return prod * prod;
}

double log_det_via_cholesky(const CholeskyFactor& factor) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < factor.lower.rows(); ++i) sum += std::log(factor.lower(i, i));
  return 2.0 * sum;
}

Eigen::MatrixXd inverse_from_cholesky(const CholeskyFactor& factor) {
  const auto& l = factor.lower;
  const Eigen::Index n = l.rows();
  Eigen::MatrixXd inv(n, n);
  Eigen::VectorXd y(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    // L y = e_c
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = i == c ? 1.0 : 0.0;
      for (Eigen::Index k = 0; k < i; ++k) v -= l(i, k) * y(k);
      y(i) = v / l(i, i);
    }
    // L^T x = y
    for (Eigen::Index i = n; i-- > 0;) {
      double v = y(i);
      for (Eigen::Index k = i + 1; k < n; ++k) v -= l(k, i) * inv(k, c);
      inv(i, c) = v / l(i, i);
    }
  }
  return inv;
}

std::vector<double> det_gradient(const SurrogateKernel& ktilde,
                                 std::span<const Eigen::MatrixXd> d_kernel_d_theta) {
  const CholeskyFactor factor = cholesky(ktilde.entries);
  const double det = det_via_cholesky(factor);
  const Eigen::MatrixXd inv = inverse_from_cholesky(factor);
  std::vector<double> grad;
  grad.reserve(d_kernel_d_theta.size());
  for (const auto& dk : d_kernel_d_theta) {
    if (dk.rows() != inv.rows() || dk.cols() != inv.cols()) {
      throw std::invalid_argument("det_gradient: entry-gradient shape mismatch");
    }
    // tr(A B) = sum_ij A_ij B_ji
    grad.push_back(det * ktilde.beta * (inv.transpose().cwiseProduct(dk)).sum());
  }
  return grad;
}

double surrogate_det_lower_bound(int m, double beta) {
  if (m < 1) throw std::invalid_argument("surrogate_det_lower_bound: M must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("surrogate_det_lower_bound: beta must be in (0,1)");
  }
  return (1.0 - beta + m * beta) * std::pow(1.0 - beta, m - 1);
}

}  // namespace pdo::det
