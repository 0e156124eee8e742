#pragma once

// Surrogate regularisation of kernel matrices, Cholesky factorisation and
// determinant evaluation with analytic gradients.

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdo/kernels/dse.hpp"

namespace pdo::det {

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// beta * K + (1 - beta) * I. Positive definite whenever K is PSD with unit
// diagonal and beta is in (0, 1).
struct SurrogateKernel {
  Eigen::MatrixXd entries;
  double beta = 0.0;
};

SurrogateKernel surrogate(const Eigen::MatrixXd& kernel, double beta);
SurrogateKernel surrogate(const kernels::KernelMatrix& kernel, double beta);

struct CholeskyFactor {
  Eigen::MatrixXd lower;
};

inline constexpr double kPivotTolerance = 1e-12;

// Lower-triangular L with L L^T = A. Throws NotPositiveDefinite if any pivot
// is <= pivot_tolerance.
CholeskyFactor cholesky(const Eigen::MatrixXd& a, double pivot_tolerance = kPivotTolerance);

// (prod_i L_ii)^2
double det_via_cholesky(const CholeskyFactor& factor);
// 2 * sum_i log L_ii
double log_det_via_cholesky(const CholeskyFactor& factor);
// A^{-1} by forward/back substitution against the factor.
Eigen::MatrixXd inverse_from_cholesky(const CholeskyFactor& factor);

// d det(K~) / d theta_p = det(K~) tr(K~^{-1} beta dK/dtheta_p) for each
// parameter p, with dK/dtheta_p given as an M x M matrix per parameter.
std::vector<double> det_gradient(const SurrogateKernel& ktilde,
                                 std::span<const Eigen::MatrixXd> d_kernel_d_theta);

// (1 - beta + M beta)(1 - beta)^(M - 1): lower bound on det of the surrogate
// of any PSD unit-diagonal kernel with entries in [0, 1]; attained by the
// all-ones kernel.
double surrogate_det_lower_bound(int m, double beta);

}  // namespace pdo::det
