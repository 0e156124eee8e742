#pragma once

#include <iosfwd>
#include <vector>

#include "pdo/policy/policy.hpp"
#include "pdo/rl/normalizer.hpp"
#include "pdo/rl/optimizer.hpp"

namespace pdo::rl {

struct AgentOptions {
  std::vector<int> hidden{64, 64};
  policy::Activation activation = policy::Activation::kTanh;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double gamma = 0.99;  // for the reward scaler
  bool scale_rewards = true;
  policy::InitOptions init;
};

// Everything a learner carries between iterations and everything copied on
// exploitation: networks, optimizer moments and normalisation statistics.
struct Agent {
  policy::Policy policy;
  policy::ValueFunction value;
  Optimizer policy_optimizer;
  Optimizer value_optimizer;
  Normalizer obs_normalizer;
  RewardScaler reward_scaler;
  bool scale_rewards = true;

  static Agent create(int obs_dim, policy::ActionSpace action_space,
                      const AgentOptions& options, Rng& rng);

  Observation normalize(std::span<const double> raw_obs) const {
    return obs_normalizer.normalize(raw_obs);
  }
  bool operator==(const Agent&) const = default;
};

void write_agent(std::ostream& out, const Agent& agent);
Agent read_agent(std::istream& in);

}  // namespace pdo::rl
