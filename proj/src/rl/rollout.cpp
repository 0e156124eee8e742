#include "pdo/rl/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace pdo::rl {

RolloutBuffer collect_rollout(Agent& agent, env::Environment& env, RolloutCursor& cursor,
                              int steps, Rng& rng, int learner_id) {
  if (steps < 1) throw std::invalid_argument("collect_rollout: steps must be >= 1");
  RolloutBuffer buffer;
  buffer.learner_id = learner_id;
  buffer.transitions.reserve(steps);
  policy::Mlp::Cache cache;
  for (int t = 0; t < steps; ++t) {
    if (cursor.needs_reset) {
      cursor.raw_obs = env.reset(rng());
      cursor.needs_reset = false;
      cursor.episode_return = 0.0;
    }
    Transition tr;
    tr.raw_obs = cursor.raw_obs;
    agent.obs_normalizer.update(tr.raw_obs);
    tr.obs = agent.normalize(tr.raw_obs);
    const ActionDistribution dist = agent.policy.forward(tr.obs, cache);
    tr.action = sample_action(dist, rng);
    tr.log_prob = log_prob(dist, tr.action);
    tr.value = agent.value.value(tr.obs);

    env::StepResult res = env.step(tr.action);
    tr.sparse_reward = res.sparse_reward;
    tr.reward = agent.scale_rewards ? agent.reward_scaler.scale(res.reward, res.done) : res.reward;
    tr.done = res.done;
    cursor.episode_return += res.sparse_reward;
    if (res.done) {
      buffer.episode_returns.push_back(cursor.episode_return);
      cursor.needs_reset = true;
    } else {
      cursor.raw_obs = std::move(res.obs);
    }
    buffer.transitions.push_back(std::move(tr));
  }
  if (!cursor.needs_reset) {
    buffer.bootstrap_value = agent.value.value(agent.normalize(cursor.raw_obs));
  }
  return buffer;
}

AdvantageEstimate gae(const RolloutBuffer& buffer, double gamma, double lam) {
  const std::size_t n = buffer.size();
  AdvantageEstimate out;
  out.raw.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = buffer.bootstrap_value;
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const Transition& tr = buffer.transitions[k];
    const double not_done = tr.done ? 0.0 : 1.0;
    const double delta = tr.reward + gamma * next_value * not_done - tr.value;
    running = delta + gamma * lam * not_done * running;
    out.raw[k] = running;
    out.returns[k] = running + tr.value;
    next_value = tr.value;
  }
  out.normalized = out.raw;
  if (n > 0) {
    double mean = 0.0;
    for (double a : out.raw) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : out.raw) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : out.normalized) a = (a - mean) / (sd + 1e-8);
  }
  return out;
}

Evaluation evaluate(const Agent& agent, env::Environment& env, int episodes, bool deterministic,
                    std::uint64_t seed_base, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  Evaluation out;
  const int bd_dim = env.bd_dim();
  out.bd.assign(bd_dim, 0.0);
  policy::Mlp::Cache cache;
  for (int e = 0; e < episodes; ++e) {
    Observation obs = env.reset(seed_base + static_cast<std::uint64_t>(e));
    double total = 0.0;
    for (;;) {
      const Observation x = agent.normalize(obs);
      Action a;
      if (deterministic && agent.policy.action_space().is_continuous()) {
        a = agent.policy.mean_action(x, cache);
      } else if (deterministic) {
        a = deterministic_action(agent.policy.forward(x, cache));
      } else {
        a = sample_action(agent.policy.forward(x, cache), rng);
      }
      env::StepResult res = env.step(a);
      total += res.sparse_reward;
      if (res.done) break;
      obs = std::move(res.obs);
    }
    out.episode_returns.push_back(total);
    out.fitness += total;
    const std::vector<double> bd = env.behavior_descriptor();
    for (int k = 0; k < bd_dim; ++k) out.bd[k] += bd[k];
  }
  out.fitness /= episodes;
  for (double& b : out.bd) b /= episodes;
  return out;
}

}  // namespace pdo::rl
