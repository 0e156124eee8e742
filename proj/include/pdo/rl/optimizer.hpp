#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdo/io/binary.hpp"

namespace pdo::rl {

enum class OptimizerKind { kAdam, kSgd };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

// First-order optimizer minimising a loss; `grad` is d(loss)/d(params).
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, std::size_t size);

  OptimizerKind kind() const { return kind_; }
  std::size_t size() const { return m_.size(); }
  long steps() const { return steps_; }

  void step(std::span<double> params, std::span<const double> grad, double learning_rate);

  void write(io::BinaryWriter& out) const;
  static Optimizer read(io::BinaryReader& in);
  bool operator==(const Optimizer&) const = default;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  long steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace pdo::rl
