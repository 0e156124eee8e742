#pragma once

#include <Eigen/Dense>

#include "pdo/policy/distributions.hpp"

namespace pdo::kernels {

// Jensen-Shannon divergence in nats, in [0, ln 2]. Zero-probability terms use
// the 0 log 0 = 0 convention.
double jsd(const DiscreteDist& p, const DiscreteDist& q);

struct Similarity {
  double value = 0.0;
  bool clamped = false;  // input fell outside [0, ln 2] (numerical slack)
};

// Maps a JS divergence to a similarity: 1 - d / ln 2, clamped to [0, 1].
Similarity f_js(double divergence);

// Squared 2-Wasserstein distance between diagonal Gaussians:
// |m1 - m2|^2 + sum_k (sigma1_k - sigma2_k)^2.
double w2_squared_diag(const DiagGaussian& a, const DiagGaussian& b);

// Squared 2-Wasserstein distance between full-covariance Gaussians:
// |m1 - m2|^2 + tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2).
// Matrix square roots use a symmetric eigendecomposition with negative
// eigenvalues clamped to zero. Throws on non-symmetric covariances.
double w2_squared_full(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                       const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2);

// Symmetric PSD square root (eigenvalues clamped at zero).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a);

}  // namespace pdo::kernels
