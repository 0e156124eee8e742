#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdo/io/binary.hpp"

namespace pdo::rl {

// Per-dimension running mean and population variance (Welford updates with
// Chan's parallel merge).
class Normalizer {
 public:
  explicit Normalizer(int dim = 0);

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  std::span<const double> mean() const { return mean_; }
  std::vector<double> variance() const;

  void update(std::span<const double> x);
  void merge(const Normalizer& other);
  // (x - mean) / sqrt(var + eps), clipped to [-clip, clip]. Identity-shifted
  // only once at least one sample has been seen.
  std::vector<double> normalize(std::span<const double> x, double clip = 10.0) const;

  void write(io::BinaryWriter& out) const;
  static Normalizer read(io::BinaryReader& in);
  bool operator==(const Normalizer&) const = default;

 private:
  double count_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// Scales rewards by the running std of the discounted return.
class RewardScaler {
 public:
  explicit RewardScaler(double gamma = 0.99) : gamma_(gamma), stats_(1) {}

  double scale(double reward, bool done);
  double stddev() const;
  const Normalizer& stats() const { return stats_; }

  void write(io::BinaryWriter& out) const;
  static RewardScaler read(io::BinaryReader& in);
  bool operator==(const RewardScaler&) const = default;

 private:
  double gamma_;
  double running_return_ = 0.0;
  Normalizer stats_;
};

}  // namespace pdo::rl
