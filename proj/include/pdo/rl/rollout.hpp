#pragma once

#include <cstdint>
#include <vector>

#include "pdo/env/environment.hpp"
#include "pdo/rl/agent.hpp"

namespace pdo::rl {

struct Transition {
  Observation raw_obs;  // as returned by the environment
  Observation obs;      // normalised with the learner's statistics at collection time
  Action action;
  double log_prob = 0.0;
  double reward = 0.0;         // learning reward after scaling
  double sparse_reward = 0.0;  // unscaled fitness reward
  double value = 0.0;
  bool done = false;
};

struct RolloutBuffer {
  int learner_id = 0;
  std::vector<Transition> transitions;
  // Value estimate of the state following the last transition (0 if it ended
  // an episode).
  double bootstrap_value = 0.0;
  std::vector<double> episode_returns;  // sparse returns of completed episodes

  std::size_t size() const { return transitions.size(); }
};

// Environment position carried across rollouts so episodes continue between
// policy iterations. Each new episode is reset with a seed drawn from `rng`.
struct RolloutCursor {
  Observation raw_obs;
  bool needs_reset = true;
  double episode_return = 0.0;
};

// Collects exactly `steps` transitions, updating the agent's observation
// normaliser and reward scaler as it goes.
RolloutBuffer collect_rollout(Agent& agent, env::Environment& env, RolloutCursor& cursor,
                              int steps, Rng& rng, int learner_id = 0);

struct AdvantageEstimate {
  std::vector<double> raw;         // GAE(gamma, lambda) advantages
  std::vector<double> normalized;  // zero mean, unit std over the batch
  std::vector<double> returns;     // raw + value (value-function targets)
};

AdvantageEstimate gae(const RolloutBuffer& buffer, double gamma, double lam);

struct Evaluation {
  double fitness = 0.0;  // mean undiscounted sparse return
  std::vector<double> bd;
  std::vector<double> episode_returns;
};

// Runs `episodes` episodes with reset seeds seed_base, seed_base + 1, ...
// Deterministic evaluation uses the distribution mode; otherwise actions are
// sampled from `rng`.
Evaluation evaluate(const Agent& agent, env::Environment& env, int episodes, bool deterministic,
                    std::uint64_t seed_base, Rng& rng);

}  // namespace pdo::rl
