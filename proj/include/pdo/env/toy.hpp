#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "pdo/env/environment.hpp"

namespace pdo::env {

struct Goal {
  std::array<double, 2> position{};
  double reward = 1.0;
};

struct ToyConfig {
  // Asymmetric rewards so that reaching the lesser goal is a real trade-off.
  std::vector<Goal> goals{{{0.5, 0.5}, 1.0}, {{-0.5, -0.5}, 0.7}};
  std::array<double, 2> spawn{0.0, 0.0};
  double step_size = 0.05;
  double goal_width = 0.02;  // reward = r * exp(-|p - g|^2 / goal_width)
  int horizon = 100;
};

nlohmann::json to_json(const ToyConfig& config);
ToyConfig toy_config_from_json(const nlohmann::json& j);

// Deterministic 2-D multi-goal point navigation in [-1, 1]^2. Observation is
// (x, y, step / horizon); behaviour descriptor is the final position mapped to
// [0, 1]^2.
class ToyEnv final : public Environment {
 public:
  explicit ToyEnv(ToyConfig config = {});

  std::string name() const override { return "toy"; }
  int obs_dim() const override { return 3; }
  policy::ActionSpace action_space() const override {
    return policy::ActionSpace::continuous(2);
  }
  Observation reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  int bd_dim() const override { return 2; }
  std::vector<double> behavior_descriptor() const override;
  double qd_offset() const override { return 0.0; }
  std::unique_ptr<Environment> clone() const override;

  const ToyConfig& config() const { return config_; }
  std::array<double, 2> position() const { return position_; }
  int step_index() const { return step_; }
  double reward_at(std::array<double, 2> position) const;
  // Positions after each step of the current episode.
  const std::vector<std::array<double, 2>>& trace() const { return trace_; }

 private:
  Observation observe() const;

  ToyConfig config_;
  std::array<double, 2> position_{};
  int step_ = 0;
  std::vector<std::array<double, 2>> trace_;
};

// CSV with columns step,x,y.
void write_trace_csv(std::ostream& out, std::span<const std::array<double, 2>> trace);

}  // namespace pdo::env
