#pragma once

#include <random>
#include <span>
#include <variant>
#include <vector>

namespace pdo {

using Observation = std::vector<double>;
using Action = std::vector<double>;
using Rng = std::mt19937_64;

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian over a continuous action vector.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_std;

  std::size_t dim() const { return mean.size(); }
  double stddev(std::size_t i) const;
  // Throws std::invalid_argument on length mismatch or non-finite log_std.
  void validate() const;
};

// Categorical distribution over a finite action set.
struct DiscreteDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  // Entries must be non-negative and sum to one within 1e-9.
  void validate() const;
};

using ActionDistribution = std::variant<DiagGaussian, DiscreteDist>;

Action sample_action(const ActionDistribution& dist, Rng& rng);
double log_prob(const ActionDistribution& dist, std::span<const double> action);
Action deterministic_action(const ActionDistribution& dist);
double entropy(const ActionDistribution& dist);

}  // namespace pdo
