#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "pdo/rl/rollout.hpp"

namespace pdo::rl {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int num_minibatches = 4;
  double learning_rate = 3e-4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantages = true;
};

nlohmann::json to_json(const PpoConfig& config);
PpoConfig ppo_config_from_json(const nlohmann::json& j);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int updates = 0;
  bool aborted = false;  // non-finite loss or gradient; parameters restored
};

nlohmann::json to_json(const PpoStats& stats);

struct LossGradient {
  std::vector<double> grad;  // d(loss)/d(params), mean over the minibatch
  double loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate loss (negated, minus the entropy bonus) over the selected
// transitions and its gradient.
LossGradient policy_loss_gradient(const policy::Policy& policy, const RolloutBuffer& buffer,
                                  std::span<const double> advantages,
                                  std::span<const std::size_t> indices, const PpoConfig& config);

// value_coef * 0.5 * mean (V(s) - target)^2 and its gradient.
LossGradient value_loss_gradient(const policy::ValueFunction& value, const RolloutBuffer& buffer,
                                 std::span<const double> targets,
                                 std::span<const std::size_t> indices, const PpoConfig& config);

// Minibatch index partition for one epoch (shuffled with `rng`).
std::vector<std::vector<std::size_t>> minibatch_partition(std::size_t n, int num_minibatches,
                                                          Rng& rng);

PpoStats ppo_update(Agent& agent, const RolloutBuffer& buffer, const PpoConfig& config, Rng& rng);

bool all_finite(std::span<const double> v);

}  // namespace pdo::rl
