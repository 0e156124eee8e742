#include "pdo/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pdo/det/diversity_objective.hpp"

namespace pdo::rl {

nlohmann::json to_json(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip", c.clip},
          {"epochs", c.epochs},
          {"num_minibatches", c.num_minibatches},
          {"learning_rate", c.learning_rate},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"max_grad_norm", c.max_grad_norm},
          {"normalize_advantages", c.normalize_advantages}};
}

PpoConfig ppo_config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  c.gamma = j.value("gamma", c.gamma);
  c.lambda = j.value("lambda", c.lambda);
  c.clip = j.value("clip", c.clip);
  c.epochs = j.value("epochs", c.epochs);
  c.num_minibatches = j.value("num_minibatches", c.num_minibatches);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.normalize_advantages = j.value("normalize_advantages", c.normalize_advantages);
  if (c.epochs < 1 || c.num_minibatches < 1 || c.clip <= 0.0 || c.learning_rate < 0.0) {
    throw std::invalid_argument("ppo: invalid configuration");
  }
  return c;
}

nlohmann::json to_json(const PpoStats& s) {
  return {{"policy_loss", s.policy_loss},   {"value_loss", s.value_loss},
          {"entropy", s.entropy},           {"approx_kl", s.approx_kl},
          {"clip_fraction", s.clip_fraction}, {"updates", s.updates},
          {"aborted", s.aborted}};
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

LossGradient policy_loss_gradient(const policy::Policy& policy, const RolloutBuffer& buffer,
                                  std::span<const double> advantages,
                                  std::span<const std::size_t> indices, const PpoConfig& config) {
  LossGradient out;
  out.grad.assign(policy.param_count(), 0.0);
  if (indices.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  policy::Mlp::Cache cache;
  policy::DistParamGrad up;
  for (std::size_t idx : indices) {
    const Transition& tr = buffer.transitions.at(idx);
    const ActionDistribution dist = policy.forward(tr.obs, cache);
    const double logp = log_prob(dist, tr.action);
    const double log_ratio = logp - tr.log_prob;
    const double ratio = std::exp(log_ratio);
    const double adv = advantages[idx];
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
    const bool use_unclipped = ratio * adv <= clipped * adv;
    out.loss -= std::min(ratio * adv, clipped * adv) * inv_n;
    if (std::abs(ratio - 1.0) > config.clip) out.clip_fraction += inv_n;
    out.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
    const double ent = entropy(dist);
    out.entropy += ent * inv_n;
    out.loss -= config.entropy_coef * ent * inv_n;

    // d(loss)/d(log_prob) for this sample.
    const double d_logp = use_unclipped ? -adv * ratio * inv_n : 0.0;
    const double d_ent = -config.entropy_coef * inv_n;
    if (const auto* g = std::get_if<DiagGaussian>(&dist)) {
      up.d_output.assign(g->dim(), 0.0);
      up.d_log_std.assign(g->dim(), 0.0);
      for (std::size_t k = 0; k < g->dim(); ++k) {
        const double var = std::exp(2.0 * g->log_std[k]);
        const double diff = tr.action[k] - g->mean[k];
        up.d_output[k] = d_logp * diff / var;
        up.d_log_std[k] = d_logp * (diff * diff / var - 1.0) + d_ent;
      }
    } else {
      const auto& p = std::get<DiscreteDist>(dist).probs;
      const std::size_t a = static_cast<std::size_t>(tr.action.at(0));
      std::vector<double> d_probs(p.size(), 0.0);
      for (std::size_t k = 0; k < p.size(); ++k) {
        // d entropy / d p_k = -(log p_k + 1)
        d_probs[k] = d_ent * (p[k] > 0.0 ? -(std::log(p[k]) + 1.0) : 0.0);
      }
      up.d_output = policy::softmax_backward(p, d_probs);
      for (std::size_t k = 0; k < p.size(); ++k) {
        up.d_output[k] += d_logp * ((k == a ? 1.0 : 0.0) - p[k]);
      }
      up.d_log_std.clear();
    }
    policy.backward_one(cache, up, out.grad);
  }
  return out;
}

LossGradient value_loss_gradient(const policy::ValueFunction& value, const RolloutBuffer& buffer,
                                 std::span<const double> targets,
                                 std::span<const std::size_t> indices, const PpoConfig& config) {
  LossGradient out;
  out.grad.assign(value.param_count(), 0.0);
  if (indices.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  policy::Mlp::Cache cache;
  for (std::size_t idx : indices) {
    const Transition& tr = buffer.transitions.at(idx);
    const double err = value.value(tr.obs, cache) - targets[idx];
    out.loss += config.value_coef * 0.5 * err * err * inv_n;
    value.backward_one(cache, config.value_coef * err * inv_n, out.grad);
  }
  return out;
}

std::vector<std::vector<std::size_t>> minibatch_partition(std::size_t n, int num_minibatches,
                                                          Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  const std::size_t parts = std::min<std::size_t>(std::max(1, num_minibatches), std::max<std::size_t>(n, 1));
  std::vector<std::vector<std::size_t>> out(parts);
  for (std::size_t i = 0; i < n; ++i) out[i * parts / n].push_back(order[i]);
  return out;
}

PpoStats ppo_update(Agent& agent, const RolloutBuffer& buffer, const PpoConfig& config,
                    Rng& rng) {
  if (buffer.size() == 0) throw std::invalid_argument("ppo_update: empty buffer");
  const AdvantageEstimate est = gae(buffer, config.gamma, config.lambda);
  const std::vector<double>& adv = config.normalize_advantages ? est.normalized : est.raw;

  const Agent backup = agent;
  PpoStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& mb : minibatch_partition(buffer.size(), config.num_minibatches, rng)) {
      LossGradient pg = policy_loss_gradient(agent.policy, buffer, adv, mb, config);
      LossGradient vg = value_loss_gradient(agent.value, buffer, est.returns, mb, config);
      if (!std::isfinite(pg.loss) || !std::isfinite(vg.loss) || !all_finite(pg.grad) ||
          !all_finite(vg.grad)) {
        agent = backup;
        stats.aborted = true;
        return stats;
      }
      det::clip_grad_norm(pg.grad, config.max_grad_norm);
      det::clip_grad_norm(vg.grad, config.max_grad_norm);
      agent.policy_optimizer.step(agent.policy.mutable_params(), pg.grad, config.learning_rate);
      agent.value_optimizer.step(agent.value.mutable_params(), vg.grad, config.learning_rate);
      stats.policy_loss += pg.loss;
      stats.value_loss += vg.loss;
      stats.entropy += pg.entropy;
      stats.approx_kl += pg.approx_kl;
      stats.clip_fraction += pg.clip_fraction;
      ++stats.updates;
    }
  }
  if (!all_finite(agent.policy.params()) || !all_finite(agent.value.params())) {
    agent = backup;
    stats = PpoStats{};
    stats.aborted = true;
    return stats;
  }
  const double n = stats.updates;
  stats.policy_loss /= n;
  stats.value_loss /= n;
  stats.entropy /= n;
  stats.approx_kl /= n;
  stats.clip_fraction /= n;
  return stats;
}

}  // namespace pdo::rl
