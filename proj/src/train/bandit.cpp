#include "pdo/train/bandit.hpp"

#include <cmath>
#include <stdexcept>

namespace pdo::train {

namespace {

double sample_beta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

void require_arms(const BanditState& bandit) {
  if (bandit.arms.empty()) throw std::invalid_argument("bandit: at least one arm required");
}

}  // namespace

BanditState BanditState::create(std::vector<double> arms) {
  BanditState b;
  b.successes.assign(arms.size(), 0);
  b.failures.assign(arms.size(), 0);
  b.arms = std::move(arms);
  require_arms(b);
  return b;
}

long BanditState::total_pulls() const {
  long n = 0;
  for (std::size_t i = 0; i < arms.size(); ++i) n += pulls(static_cast<int>(i));
  return n;
}

int thompson_select(BanditState& bandit, std::mt19937_64& rng) {
  require_arms(bandit);
  int best = 0;
  double best_draw = -1.0;
  for (std::size_t i = 0; i < bandit.arms.size(); ++i) {
    const double draw = sample_beta(static_cast<double>(bandit.successes[i]) + 1.0,
                                    static_cast<double>(bandit.failures[i]) + 1.0, rng);
    if (draw > best_draw) {
      best_draw = draw;
      best = static_cast<int>(i);
    }
  }
  bandit.last_arm = best;
  return best;
}

int ucb_select(BanditState& bandit) {
  require_arms(bandit);
  for (std::size_t i = 0; i < bandit.arms.size(); ++i) {
    if (bandit.pulls(static_cast<int>(i)) == 0) {
      bandit.last_arm = static_cast<int>(i);
      return bandit.last_arm;
    }
  }
  const double log_n = std::log(static_cast<double>(bandit.total_pulls()));
  int best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < bandit.arms.size(); ++i) {
    const double n = static_cast<double>(bandit.pulls(static_cast<int>(i)));
    const double score = static_cast<double>(bandit.successes[i]) / n + std::sqrt(2.0 * log_n / n);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  bandit.last_arm = best;
  return best;
}

void bandit_update(BanditState& bandit, bool improved) {
  if (bandit.last_arm < 0) throw std::logic_error("bandit_update: no arm selected");
  if (improved) {
    ++bandit.successes[bandit.last_arm];
  } else {
    ++bandit.failures[bandit.last_arm];
  }
}

bool observe_best(BanditState& bandit, double best_fitness) {
  const bool improved = best_fitness > bandit.best_fitness_so_far;
  if (improved) bandit.best_fitness_so_far = best_fitness;
  return improved;
}

nlohmann::json to_json(const BanditState& b) {
  return {{"arms", b.arms}, {"successes", b.successes}, {"failures", b.failures}};
}

}  // namespace pdo::train
