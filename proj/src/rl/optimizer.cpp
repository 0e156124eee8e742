#include "pdo/rl/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace pdo::rl {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw std::invalid_argument("unknown optimizer: " + name);
}

Optimizer::Optimizer(OptimizerKind kind, std::size_t size)
    : kind_(kind), m_(size, 0.0), v_(size, 0.0) {}

void Optimizer::step(std::span<double> params, std::span<const double> grad,
                     double learning_rate) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("Optimizer::step: size mismatch");
  }
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad[i];
    return;
  }
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEpsilon);
  }
}

void Optimizer::write(io::BinaryWriter& out) const {
  out.u32(kind_ == OptimizerKind::kAdam ? 0 : 1);
  out.i64(steps_);
  out.f64s(m_);
  out.f64s(v_);
}

Optimizer Optimizer::read(io::BinaryReader& in) {
  Optimizer o;
  const auto kind = in.u32();
  if (kind > 1) throw std::runtime_error("Optimizer: corrupt data");
  o.kind_ = kind == 0 ? OptimizerKind::kAdam : OptimizerKind::kSgd;
  o.steps_ = in.i64();
  o.m_ = in.f64s();
  o.v_ = in.f64s();
  if (o.m_.size() != o.v_.size()) throw std::runtime_error("Optimizer: corrupt data");
  return o;
}

}  // namespace pdo::rl
