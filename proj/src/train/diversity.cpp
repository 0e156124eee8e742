#include "pdo/train/diversity.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pdo::train {

std::vector<Observation> sample_probe_states(std::span<const rl::RolloutBuffer> buffers,
                                             int count, std::mt19937_64& rng) {
  std::vector<const Observation*> pool;
  for (const auto& b : buffers) {
    for (const auto& tr : b.transitions) pool.push_back(&tr.raw_obs);
  }
  if (pool.empty()) throw std::invalid_argument("sample_probe_states: no states available");
  const std::size_t k = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count));
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::vector<Observation> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(*pool[i]);
  return out;
}

std::vector<kernels::StateBatch> per_agent_batches(std::span<const rl::Agent* const> agents,
                                                   const std::vector<Observation>& probe_raw) {
  std::vector<kernels::StateBatch> out;
  out.reserve(agents.size());
  for (const rl::Agent* a : agents) {
    kernels::StateBatch b;
    b.source = "rollout_union";
    b.states.reserve(probe_raw.size());
    for (const auto& s : probe_raw) b.states.push_back(a->normalize(s));
    out.push_back(std::move(b));
  }
  return out;
}

DiversifyResult diversify(std::vector<policy::Policy> policies,
                          std::span<const kernels::StateBatch> batches,
                          const DiversifyOptions& options, std::mt19937_64& rng) {
  DiversifyResult out;
  const det::DiversityObjective initial = det::auxiliary_objective(
      policies, batches, options.kernel, options.ascent.beta, det::GradientTarget::kDet);
  out.det_trace.push_back(initial.value);
  out.beta = initial.beta;

  if (options.iterations > 0 && options.jitter_std > 0.0) {
    kernels::PopulationKernel kernel(policies, batches, options.kernel);
    const Eigen::MatrixXd& d = kernel.mean_distances();
    std::normal_distribution<double> noise(0.0, options.jitter_std);
    for (Eigen::Index j = 1; j < d.rows(); ++j) {
      bool duplicate = false;
      for (Eigen::Index i = 0; i < j; ++i) duplicate |= d(i, j) <= options.duplicate_threshold;
      if (!duplicate) continue;
      auto params = policies[j].mutable_params();
      const std::size_t n = policies[j].net_param_count();
      for (std::size_t p = 0; p < n; ++p) params[p] += noise(rng);
      out.jittered.push_back(static_cast<int>(j));
    }
    if (!out.jittered.empty()) {
      out.det_trace.push_back(det::auxiliary_objective(policies, batches, options.kernel,
                                                       options.ascent.beta,
                                                       det::GradientTarget::kDet)
                                  .value);
    }
  }

  // The normalisation divisor is fixed once for the whole phase.
  kernels::KernelOptions fixed = options.kernel;
  if (fixed.metric == kernels::Metric::kW2 && fixed.variance_normalization) {
    fixed.rbf_sigma_sq *= kernels::PopulationKernel(policies, batches, options.kernel).scale();
    fixed.variance_normalization = false;
  }
  for (int it = 0; it < options.iterations; ++it) {
    det::diversity_ascent_step(policies, batches, fixed, options.ascent);
    const det::DiversityObjective after = det::auxiliary_objective(
        policies, batches, fixed, options.ascent.beta, det::GradientTarget::kDet);
    out.det_trace.push_back(after.value);
    out.beta = after.beta;
  }
  out.final_distances = kernels::PopulationKernel(policies, batches, fixed).mean_distances();
  out.policies = std::move(policies);
  return out;
}

std::vector<rl::PpoStats> dvd_update(std::span<rl::Agent* const> agents,
                                     std::span<const rl::RolloutBuffer> buffers,
                                     const std::vector<Observation>& probe_raw,
                                     const rl::PpoConfig& config, const DvdOptions& options,
                                     std::span<std::mt19937_64* const> rngs) {
  const std::size_t m = agents.size();
  if (buffers.size() != m || rngs.size() != m) {
    throw std::invalid_argument("dvd_update: agents, buffers and rngs must align");
  }
  if (!(options.lambda >= 0.0 && options.lambda <= 1.0)) {
    throw std::invalid_argument("dvd_update: lambda must lie in [0, 1]");
  }
  std::vector<rl::AdvantageEstimate> est;
  for (std::size_t j = 0; j < m; ++j) {
    if (buffers[j].size() == 0) throw std::invalid_argument("dvd_update: empty buffer");
    est.push_back(rl::gae(buffers[j], config.gamma, config.lambda));
  }
  std::vector<rl::Agent> backup;
  for (const rl::Agent* a : agents) backup.push_back(*a);
  std::vector<rl::PpoStats> stats(m);
  auto abort_all = [&] {
    for (std::size_t j = 0; j < m; ++j) {
      *agents[j] = backup[j];
      stats[j] = rl::PpoStats{};
      stats[j].aborted = true;
    }
    return stats;
  };
  const bool use_diversity = options.lambda > 0.0;
  std::vector<kernels::StateBatch> batches;
  if (use_diversity) batches = per_agent_batches(agents, probe_raw);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::vector<std::vector<std::size_t>>> parts(m);
    std::size_t rounds = 0;
    for (std::size_t j = 0; j < m; ++j) {
      parts[j] = rl::minibatch_partition(buffers[j].size(), config.num_minibatches, *rngs[j]);
      rounds = std::max(rounds, parts[j].size());
    }
    for (std::size_t k = 0; k < rounds; ++k) {
      std::vector<std::vector<double>> div_grads;
      if (use_diversity) {
        std::vector<policy::Policy> policies;
        for (const rl::Agent* a : agents) policies.push_back(a->policy);
        det::DiversityObjective obj = det::auxiliary_objective(
            policies, batches, options.kernel, options.beta, det::GradientTarget::kDet);
        div_grads = std::move(obj.grads);
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (k >= parts[j].size()) continue;
        const auto& mb = parts[j][k];
        const auto& adv = config.normalize_advantages ? est[j].normalized : est[j].raw;
        rl::LossGradient pg = rl::policy_loss_gradient(agents[j]->policy, buffers[j], adv, mb, config);
        rl::LossGradient vg =
            rl::value_loss_gradient(agents[j]->value, buffers[j], est[j].returns, mb, config);
        if (use_diversity) {
          for (std::size_t p = 0; p < pg.grad.size(); ++p) {
            pg.grad[p] = (1.0 - options.lambda) * pg.grad[p] - options.lambda * div_grads[j][p];
          }
        }
        if (!std::isfinite(pg.loss) || !std::isfinite(vg.loss) || !rl::all_finite(pg.grad) ||
            !rl::all_finite(vg.grad)) {
          return abort_all();
        }
        det::clip_grad_norm(pg.grad, config.max_grad_norm);
        det::clip_grad_norm(vg.grad, config.max_grad_norm);
        agents[j]->policy_optimizer.step(agents[j]->policy.mutable_params(), pg.grad,
                                         config.learning_rate);
        agents[j]->value_optimizer.step(agents[j]->value.mutable_params(), vg.grad,
                                        config.learning_rate);
        stats[j].policy_loss += pg.loss;
        stats[j].value_loss += vg.loss;
        stats[j].entropy += pg.entropy;
        stats[j].approx_kl += pg.approx_kl;
        stats[j].clip_fraction += pg.clip_fraction;
        ++stats[j].updates;
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!rl::all_finite(agents[j]->policy.params()) || !rl::all_finite(agents[j]->value.params())) {
      return abort_all();
    }
    const double n = std::max(1, stats[j].updates);
    stats[j].policy_loss /= n;
    stats[j].value_loss /= n;
    stats[j].entropy /= n;
    stats[j].approx_kl /= n;
    stats[j].clip_fraction /= n;
  }
  return stats;
}

}  // namespace pdo::train
