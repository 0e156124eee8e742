#include "pdo/kernels/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdo::kernels {

namespace {

double kl_to_mixture(const DiscreteDist& p, const DiscreteDist& q) {
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = p.probs[k];
    if (pk <= 0.0) continue;
    const double mk = 0.5 * (pk + q.probs[k]);
    kl += pk * std::log(pk / mk);
  }
  return kl;
}

void require_symmetric(const Eigen::MatrixXd& s, const char* name) {
  if (s.rows() != s.cols()) throw std::invalid_argument(std::string(name) + " is not square");
  const double tol = 1e-9 * std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  }
}

}  // namespace

double jsd(const DiscreteDist& p, const DiscreteDist& q) {
  if (p.size() != q.size()) throw std::invalid_argument("jsd: support size mismatch");
  const double d = 0.5 * kl_to_mixture(p, q) + 0.5 * kl_to_mixture(q, p);
  return std::clamp(d, 0.0, std::numbers::ln2);
}

Similarity f_js(double divergence) {
  const double raw = 1.0 - divergence / std::numbers::ln2;
  if (raw < 0.0) return {0.0, true};
  if (raw > 1.0) return {1.0, true};
  return {raw, false};
}

double w2_squared_diag(const DiagGaussian& a, const DiagGaussian& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("w2_squared_diag: dimension mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double dm = a.mean[k] - b.mean[k];
    const double ds = a.stddev(k) - b.stddev(k);
    total += dm * dm + ds * ds;
  }
  return total;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double w2_squared_full(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                       const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2) {
  require_symmetric(s1, "w2_squared_full: S1");
  require_symmetric(s2, "w2_squared_full: S2");
  if (m1.size() != m2.size() || s1.rows() != m1.size() || s2.rows() != m2.size()) {
    throw std::invalid_argument("w2_squared_full: dimension mismatch");
  }
  const Eigen::MatrixXd root1 = psd_sqrt(s1);
  Eigen::MatrixXd cross = root1 * s2 * root1;
  cross = 0.5 * (cross + cross.transpose());
  const double trace_term = s1.trace() + s2.trace() - 2.0 * psd_sqrt(cross).trace();
  return std::max(0.0, (m1 - m2).squaredNorm() + trace_term);
}

}  // namespace pdo::kernels
