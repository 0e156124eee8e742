#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pdo/policy/policy.hpp"

namespace pdo::testing {

// Determinant by Laplace expansion along the first row.
inline double cofactor_det(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 1) return a(0, 0);
  if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  double total = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
      Eigen::Index cc = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, cc++) = a(i, j);
      }
    }
    total += ((c % 2) ? -1.0 : 1.0) * a(0, c) * cofactor_det(minor);
  }
  return total;
}

// Random symmetric positive-definite matrix G G^T + eps I.
inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double eps = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m * m.transpose() + eps * Eigen::MatrixXd::Identity(n, n);
}

// Random PSD matrix with unit diagonal and entries in [0, 1]: Gram matrix of
// non-negative unit vectors.
inline Eigen::MatrixXd random_unit_kernel(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int dim = 1 + static_cast<int>(rng() % 4);
  Eigen::MatrixXd v(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) v(i, k) = u(rng);
    if (v.row(i).norm() == 0.0) v(i, 0) = 1.0;
    v.row(i).normalize();
  }
  Eigen::MatrixXd k = v * v.transpose();
  for (int i = 0; i < n; ++i) k(i, i) = 1.0;
  return k.cwiseMax(0.0).cwiseMin(1.0);
}

// Central finite difference of f at x along coordinate i.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 1e-9) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Small random Gaussian policy (non-zero output layer so gradients are rich).
inline policy::Policy random_gaussian_policy(int obs_dim, int act_dim, std::mt19937_64& rng,
                                             std::vector<int> hidden = {8, 8}) {
  policy::InitOptions init;
  init.output_gain = 1.0;
  auto p = policy::Policy::create(obs_dim, policy::ActionSpace::continuous(act_dim), hidden,
                                  policy::Activation::kTanh, rng, init);
  std::normal_distribution<double> g(0.0, 0.3);
  auto params = p.mutable_params();
  for (std::size_t i = p.net_param_count(); i < params.size(); ++i) params[i] = g(rng);
  return p;
}

inline policy::Policy random_discrete_policy(int obs_dim, int n, std::mt19937_64& rng,
                                             std::vector<int> hidden = {8, 8}) {
  policy::InitOptions init;
  init.output_gain = 1.0;
  return policy::Policy::create(obs_dim, policy::ActionSpace::discrete(n), hidden,
                                policy::Activation::kTanh, rng, init);
}

inline std::vector<Observation> random_states(int count, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Observation> out(count, Observation(dim));
  for (auto& s : out)
    for (auto& v : s) v = g(rng);
  return out;
}

}  // namespace pdo::testing
