#include "pdo/env/toy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pdo::env {

nlohmann::json to_json(const ToyConfig& config) {
  nlohmann::json goals = nlohmann::json::array();
  for (const auto& g : config.goals) {
    goals.push_back({{"position", g.position}, {"reward", g.reward}});
  }
  return {{"goals", goals},
          {"spawn", config.spawn},
          {"step_size", config.step_size},
          {"goal_width", config.goal_width},
          {"horizon", config.horizon}};
}

ToyConfig toy_config_from_json(const nlohmann::json& j) {
  ToyConfig c;
  if (j.contains("goals")) {
    c.goals.clear();
    for (const auto& g : j.at("goals")) {
      c.goals.push_back({g.at("position").get<std::array<double, 2>>(), g.at("reward").get<double>()});
    }
  }
  c.spawn = j.value("spawn", c.spawn);
  c.step_size = j.value("step_size", c.step_size);
  c.goal_width = j.value("goal_width", c.goal_width);
  c.horizon = j.value("horizon", c.horizon);
  return c;
}

ToyEnv::ToyEnv(ToyConfig config) : config_(std::move(config)) {
  if (config_.goals.size() < 2) throw std::invalid_argument("ToyEnv: need at least two goals");
  if (config_.horizon < 1) throw std::invalid_argument("ToyEnv: horizon must be positive");
  reset(0);
}

Observation ToyEnv::reset(std::uint64_t /*seed*/) {
  position_ = config_.spawn;
  step_ = 0;
  trace_.clear();
  return observe();
}

double ToyEnv::reward_at(std::array<double, 2> p) const {
  double best = 0.0;
  for (const auto& g : config_.goals) {
    const double dx = p[0] - g.position[0];
    const double dy = p[1] - g.position[1];
    best = std::max(best, g.reward * std::exp(-(dx * dx + dy * dy) / config_.goal_width));
  }
  return best;
}

StepResult ToyEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw std::invalid_argument("ToyEnv::step: action must be 2-D");
  if (step_ >= config_.horizon) throw std::logic_error("ToyEnv::step: episode finished");
  for (int k = 0; k < 2; ++k) {
    const double a = std::clamp(action[k], -1.0, 1.0);
    position_[k] = std::clamp(position_[k] + config_.step_size * a, -1.0, 1.0);
  }
  ++step_;
  trace_.push_back(position_);
  StepResult out;
  out.reward = out.sparse_reward = reward_at(position_);
  out.done = step_ >= config_.horizon;
  out.obs = observe();
  return out;
}

std::vector<double> ToyEnv::behavior_descriptor() const {
  return {(position_[0] + 1.0) / 2.0, (position_[1] + 1.0) / 2.0};
}

std::unique_ptr<Environment> ToyEnv::clone() const { return std::make_unique<ToyEnv>(config_); }

Observation ToyEnv::observe() const {
  return {position_[0], position_[1], static_cast<double>(step_) / config_.horizon};
}

void write_trace_csv(std::ostream& out, std::span<const std::array<double, 2>> trace) {
  out << "step,x,y\n";
  out.precision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i + 1 << ',' << trace[i][0] << ',' << trace[i][1] << '\n';
  }
}

}  // namespace pdo::env
