#pragma once

#include <limits>
#include <random>
#include <vector>

#include "json.hpp"

namespace pdo::train {

// Bernoulli multi-armed bandit over trade-off coefficients. Both selection
// rules share the same success/failure counts.
struct BanditState {
  std::vector<double> arms;
  std::vector<long> successes;
  std::vector<long> failures;
  double best_fitness_so_far = -std::numeric_limits<double>::infinity();
  int last_arm = -1;

  static BanditState create(std::vector<double> arms);
  long pulls(int arm) const { return successes[arm] + failures[arm]; }
  long total_pulls() const;
};

// Draws Beta(s + 1, f + 1) per arm and returns the argmax arm index.
int thompson_select(BanditState& bandit, std::mt19937_64& rng);
// Unpulled arms first (lowest index), then argmax of mean + sqrt(2 ln N / n).
int ucb_select(BanditState& bandit);
// Credits the last selected arm.
void bandit_update(BanditState& bandit, bool improved);
// Compares against the best fitness seen so far, updates it and returns
// whether it strictly improved.
bool observe_best(BanditState& bandit, double best_fitness);

nlohmann::json to_json(const BanditState& bandit);

}  // namespace pdo::train
