#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdo/policy/policy.hpp"

namespace pdo::env {

struct StepResult {
  Observation obs;
  double reward = 0.0;         // learning reward (sparse + any dense shaping)
  double sparse_reward = 0.0;  // reward counted towards fitness
  bool done = false;
};

// Single-owner episodic environment. Instances are independent; concurrent
// use of distinct instances is safe.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual policy::ActionSpace action_space() const = 0;

  // Starts a new episode; all episode randomness derives from `seed`.
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;

  // Behaviour descriptor of the current episode in [0,1]^bd_dim(); empty
  // when the environment defines none.
  virtual int bd_dim() const = 0;
  virtual std::vector<double> behavior_descriptor() const = 0;

  // Fixed fitness offset used for QD-score.
  virtual double qd_offset() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace pdo::env
