#pragma once

// State-sampled similarity between stochastic policies and the population
// kernel matrix built from it. Each entry is the batch mean of f(D(pi_i(.|s),
// pi_j(.|s))) with D the JS divergence (discrete actions) or the squared
// 2-Wasserstein distance under an RBF map (continuous actions).

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "pdo/policy/policy.hpp"

namespace pdo::kernels {

enum class Metric { kJsd, kW2 };

std::string to_string(Metric metric);
Metric metric_from_string(const std::string& name);

struct StateBatch {
  std::vector<Observation> states;
  std::string source;

  // Throws unless non-empty with every state of dimension obs_dim.
  void validate(int obs_dim) const;
};

struct KernelOptions {
  Metric metric = Metric::kW2;
  // Drop the covariance term of W2 (deterministic-evaluation protocol).
  bool deterministic = false;
  // Divide squared distances by the std of the off-diagonal squared
  // distances before the RBF map (W2 only). The scale is a constant for
  // gradient purposes.
  bool variance_normalization = true;
  // RBF length scale: f(d) = exp(-d^2 / (2 sigma^2)).
  double rbf_sigma_sq = 1.0;
};

struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::vector<std::string> policy_ids;

  Eigen::Index size() const { return entries.rows(); }
  // Throws unless symmetric (1e-9), unit diagonal, entries in [0,1] and
  // minimum eigenvalue >= -1e-8.
  void validate() const;
};

// Divides the off-diagonal entries by the population std of the off-diagonal
// squared distances; returns the input unchanged when that std is < 1e-12.
Eigen::MatrixXd variance_normalize(const Eigen::MatrixXd& squared_dists);
// The divisor variance_normalize would apply (1 when the guard triggers).
double normalization_scale(const Eigen::MatrixXd& squared_dists);

// Kernel matrix over a population together with its reverse-mode gradient.
// `batches` holds either one batch shared by all policies or one batch per
// policy (the same probe states expressed in each policy's own observation
// normalisation). Holds references to both; they must outlive the object.
class PopulationKernel {
 public:
  PopulationKernel(std::span<const policy::Policy> policies,
                   std::span<const StateBatch> batches, const KernelOptions& options);

  const KernelMatrix& matrix() const { return matrix_; }
  // Pairwise state-averaged squared distances (W2) or divergences (JSD).
  const Eigen::MatrixXd& mean_distances() const { return mean_distances_; }
  double scale() const { return scale_; }
  bool clamped() const { return clamped_; }

  // Given dL/dK (entries treated as independent), returns dL/dtheta for each
  // policy. The normalisation scale is held fixed.
  std::vector<std::vector<double>> backward(const Eigen::MatrixXd& d_kernel) const;

 private:
  const StateBatch& batch_for(std::size_t i) const;
  const Observation& state(std::size_t policy, std::size_t s) const;

  std::span<const policy::Policy> policies_;
  std::span<const StateBatch> batches_;
  KernelOptions options_;
  std::size_t num_states_ = 0;
  // [policy][state]
  std::vector<std::vector<ActionDistribution>> dists_;
  // [pair index][state] squared distance or divergence
  std::vector<std::vector<double>> pair_distance_;
  Eigen::MatrixXd mean_distances_;
  double scale_ = 1.0;
  bool clamped_ = false;
  KernelMatrix matrix_;
};

KernelMatrix build_kernel_matrix(std::span<const policy::Policy> policies,
                                 std::span<const StateBatch> batches,
                                 const KernelOptions& options);

// Single similarity entry without population normalisation; 1 for identical
// parameters.
double dse_kernel_entry(const policy::Policy& pi_i, const policy::Policy& pi_j,
                        const StateBatch& batch, Metric metric, bool deterministic);

}  // namespace pdo::kernels
