#include "pdo/kernels/dse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pdo/kernels/divergence.hpp"

namespace pdo::kernels {

namespace {

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t m) {
  // Upper triangle, i < j.
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

double squared_distance(const DiagGaussian& a, const DiagGaussian& b, bool deterministic) {
  if (!deterministic) return w2_squared_diag(a, b);
  double total = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const double dm = a.mean[k] - b.mean[k];
    total += dm * dm;
  }
  return total;
}

}  // namespace

std::string to_string(Metric metric) { return metric == Metric::kJsd ? "jsd" : "w2"; }

Metric metric_from_string(const std::string& name) {
  if (name == "jsd") return Metric::kJsd;
  if (name == "w2") return Metric::kW2;
  throw std::invalid_argument("unknown metric: " + name);
}

void StateBatch::validate(int obs_dim) const {
  if (states.empty()) throw std::invalid_argument("StateBatch: empty");
  for (const auto& s : states) {
    if (s.size() != static_cast<std::size_t>(obs_dim)) {
      throw std::invalid_argument("StateBatch: observation dimension mismatch");
    }
  }
}

void KernelMatrix::validate() const {
  const Eigen::Index m = entries.rows();
  if (entries.cols() != m) throw std::logic_error("KernelMatrix: not square");
  if (!policy_ids.empty() && policy_ids.size() != static_cast<std::size_t>(m)) {
    throw std::logic_error("KernelMatrix: id count mismatch");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (entries(i, i) != 1.0) throw std::logic_error("KernelMatrix: diagonal must be 1");
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = entries(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error("KernelMatrix: entry outside [0,1]");
      if (std::abs(v - entries(j, i)) > 1e-9) throw std::logic_error("KernelMatrix: not symmetric");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(entries, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    throw std::logic_error("KernelMatrix: not positive semidefinite");
  }
}

double normalization_scale(const Eigen::MatrixXd& squared_dists) {
  const Eigen::Index m = squared_dists.rows();
  if (m < 2) return 1.0;
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      sum += squared_dists(i, j);
      count += 1.0;
    }
  }
  const double mean = sum / count;
  double var = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = squared_dists(i, j) - mean;
      var += d * d;
    }
  }
  const double stddev = std::sqrt(var / count);
  return stddev < 1e-12 ? 1.0 : stddev;
}

Eigen::MatrixXd variance_normalize(const Eigen::MatrixXd& squared_dists) {
  const double scale = normalization_scale(squared_dists);
  Eigen::MatrixXd out = squared_dists / scale;
  out.diagonal() = squared_dists.diagonal();
  return out;
}

PopulationKernel::PopulationKernel(std::span<const policy::Policy> policies,
                                   std::span<const StateBatch> batches,
                                   const KernelOptions& options)
    : policies_(policies), batches_(batches), options_(options) {
  const std::size_t m = policies_.size();
  if (m < 1) throw std::invalid_argument("PopulationKernel: empty population");
  if (batches_.size() != 1 && batches_.size() != m) {
    throw std::invalid_argument("PopulationKernel: need one shared batch or one per policy");
  }
  num_states_ = batches_[0].states.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& batch = batch_for(i);
    batch.validate(policies_[i].obs_dim());
    if (batch.states.size() != num_states_) {
      throw std::invalid_argument("PopulationKernel: batches differ in size");
    }
    const bool continuous = policies_[i].action_space().is_continuous();
    if (options_.metric == Metric::kJsd && continuous) {
      throw std::invalid_argument("PopulationKernel: JSD requires discrete actions");
    }
    if (options_.metric == Metric::kW2 && !continuous) {
      throw std::invalid_argument("PopulationKernel: W2 requires continuous actions");
    }
    if (policies_[i].action_space() != policies_[0].action_space()) {
      throw std::invalid_argument("PopulationKernel: mismatched action spaces");
    }
  }

  dists_.resize(m);
  policy::Mlp::Cache cache;
  for (std::size_t i = 0; i < m; ++i) {
    dists_[i].reserve(num_states_);
    for (std::size_t s = 0; s < num_states_; ++s) {
      dists_[i].push_back(policies_[i].forward(state(i, s), cache));
    }
  }

  pair_distance_.assign(m * (m - 1) / 2, std::vector<double>(num_states_));
  mean_distances_ = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      auto& per_state = pair_distance_[pair_index(i, j, m)];
      double total = 0.0;
      for (std::size_t s = 0; s < num_states_; ++s) {
        double d;
        if (options_.metric == Metric::kW2) {
          d = squared_distance(std::get<DiagGaussian>(dists_[i][s]),
                               std::get<DiagGaussian>(dists_[j][s]), options_.deterministic);
        } else {
          d = jsd(std::get<DiscreteDist>(dists_[i][s]), std::get<DiscreteDist>(dists_[j][s]));
        }
        per_state[s] = d;
        total += d;
      }
      mean_distances_(i, j) = mean_distances_(j, i) = total / static_cast<double>(num_states_);
    }
  }

  if (options_.metric == Metric::kW2 && options_.variance_normalization) {
    scale_ = normalization_scale(mean_distances_);
  }

  matrix_.entries = Eigen::MatrixXd::Identity(m, m);
  matrix_.policy_ids.resize(m);
  for (std::size_t i = 0; i < m; ++i) matrix_.policy_ids[i] = std::to_string(i);
  const double denom = 2.0 * options_.rbf_sigma_sq * scale_;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& per_state = pair_distance_[pair_index(i, j, m)];
      double total = 0.0;
      for (double d : per_state) {
        if (options_.metric == Metric::kW2) {
          total += std::exp(-d / denom);
        } else {
          const Similarity sim = f_js(d);
          clamped_ = clamped_ || sim.clamped;
          total += sim.value;
        }
      }
      const double entry = total / static_cast<double>(num_states_);
      matrix_.entries(i, j) = matrix_.entries(j, i) = entry;
    }
  }
}

const StateBatch& PopulationKernel::batch_for(std::size_t i) const {
  return batches_.size() == 1 ? batches_[0] : batches_[i];
}

const Observation& PopulationKernel::state(std::size_t policy, std::size_t s) const {
  return batch_for(policy).states[s];
}

std::vector<std::vector<double>> PopulationKernel::backward(
    const Eigen::MatrixXd& d_kernel) const {
  const std::size_t m = policies_.size();
  if (d_kernel.rows() != static_cast<Eigen::Index>(m) || d_kernel.cols() != d_kernel.rows()) {
    throw std::invalid_argument("PopulationKernel::backward: upstream shape mismatch");
  }
  const auto inv_states = 1.0 / static_cast<double>(num_states_);
  const double denom = 2.0 * options_.rbf_sigma_sq * scale_;
  const bool continuous = options_.metric == Metric::kW2;

  // Per-policy, per-state gradients on the distribution parameters.
  std::vector<std::vector<policy::DistParamGrad>> upstream(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t width = static_cast<std::size_t>(policies_[i].action_space().size);
    upstream[i].resize(num_states_);
    for (auto& g : upstream[i]) {
      g.d_output.assign(width, 0.0);
      if (continuous) g.d_log_std.assign(width, 0.0);
    }
  }
  // For JSD the upstream is accumulated on probabilities first.
  std::vector<std::vector<std::vector<double>>> d_probs;
  if (!continuous) {
    d_probs.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      d_probs[i].assign(num_states_, std::vector<double>(policies_[i].action_space().size, 0.0));
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double weight = (d_kernel(i, j) + d_kernel(j, i)) * inv_states;
      if (weight == 0.0) continue;
      const auto& per_state = pair_distance_[pair_index(i, j, m)];
      for (std::size_t s = 0; s < num_states_; ++s) {
        if (continuous) {
          const auto& a = std::get<DiagGaussian>(dists_[i][s]);
          const auto& b = std::get<DiagGaussian>(dists_[j][s]);
          // d f / d (squared distance)
          const double df = -std::exp(-per_state[s] / denom) / denom * weight;
          auto& gi = upstream[i][s];
          auto& gj = upstream[j][s];
          for (std::size_t k = 0; k < a.dim(); ++k) {
            const double dm = 2.0 * (a.mean[k] - b.mean[k]) * df;
            gi.d_output[k] += dm;
            gj.d_output[k] -= dm;
            if (!options_.deterministic) {
              const double sa = a.stddev(k);
              const double sb = b.stddev(k);
              const double ds = 2.0 * (sa - sb) * df;
              gi.d_log_std[k] += ds * sa;
              gj.d_log_std[k] -= ds * sb;
            }
          }
        } else {
          const auto& p = std::get<DiscreteDist>(dists_[i][s]);
          const auto& q = std::get<DiscreteDist>(dists_[j][s]);
          const double df = -weight / std::numbers::ln2;
          for (std::size_t k = 0; k < p.size(); ++k) {
            const double mk = 0.5 * (p.probs[k] + q.probs[k]);
            if (mk <= 0.0) continue;
            if (p.probs[k] > 0.0) d_probs[i][s][k] += df * 0.5 * std::log(p.probs[k] / mk);
            if (q.probs[k] > 0.0) d_probs[j][s][k] += df * 0.5 * std::log(q.probs[k] / mk);
          }
        }
      }
    }
  }

  std::vector<std::vector<double>> grads(m);
  policy::Mlp::Cache cache;
  for (std::size_t i = 0; i < m; ++i) {
    grads[i].assign(policies_[i].param_count(), 0.0);
    for (std::size_t s = 0; s < num_states_; ++s) {
      auto& g = upstream[i][s];
      if (!continuous) {
        const auto& p = std::get<DiscreteDist>(dists_[i][s]);
        g.d_output = policy::softmax_backward(p.probs, d_probs[i][s]);
      }
      bool any = false;
      for (double v : g.d_output) any = any || v != 0.0;
      for (double v : g.d_log_std) any = any || v != 0.0;
      if (!any) continue;
      policies_[i].forward(state(i, s), cache);
      policies_[i].backward_one(cache, g, grads[i]);
    }
  }
  return grads;
}

KernelMatrix build_kernel_matrix(std::span<const policy::Policy> policies,
                                 std::span<const StateBatch> batches,
                                 const KernelOptions& options) {
  if (policies.size() < 2) throw std::invalid_argument("build_kernel_matrix: need M >= 2");
  return PopulationKernel(policies, batches, options).matrix();
}

double dse_kernel_entry(const policy::Policy& pi_i, const policy::Policy& pi_j,
                        const StateBatch& batch, Metric metric, bool deterministic) {
  const std::vector<policy::Policy> pair{pi_i, pi_j};
  KernelOptions options;
  options.metric = metric;
  options.deterministic = deterministic;
  options.variance_normalization = false;
  const StateBatch batches[1] = {batch};
  return PopulationKernel(pair, batches, options).matrix().entries(0, 1);
}

}  // namespace pdo::kernels
