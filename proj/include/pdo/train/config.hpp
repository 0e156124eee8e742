#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdo/archive/archive.hpp"
#include "pdo/env/dogfight.hpp"
#include "pdo/env/toy.hpp"
#include "pdo/kernels/dse.hpp"
#include "pdo/rl/agent.hpp"
#include "pdo/rl/ppo.hpp"

namespace pdo::train {

enum class TrainerKind { kPdo, kPbt, kDvd, kDseUcb, kEdoCs, kPpoSingle };
enum class EnvKind { kDogfight, kToy };

std::string to_string(TrainerKind kind);
TrainerKind trainer_kind_from_string(const std::string& name);
std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& name);

// Settings with value 0 (or a negative sentinel) are filled in per
// environment by resolve().
struct TrainerConfig {
  TrainerKind trainer = TrainerKind::kPdo;
  EnvKind env = EnvKind::kToy;
  archive::ArchiveKind archive = archive::ArchiveKind::kGrid;
  std::uint64_t seed = 0;

  int population = 5;
  double scale = 1.0 / 50.0;     // multiplies every step budget below
  double total_steps = 3e6;      // env steps per learner
  double exploit_period = 6e5;   // env steps per learner between exploitations
  int iterations = 0;            // outer iterations; 0 derives from the budget
  int rollout_steps = 0;         // env steps per policy iteration
  int eval_interval = 0;         // policy iterations per outer iteration
  int eval_episodes = 10;

  int diversity_iters = 20;
  double beta = 0.99;
  kernels::Metric metric = kernels::Metric::kW2;
  int deterministic_kernel = -1;  // -1: environment default
  bool variance_normalization = true;
  double rbf_sigma_sq = 1.0;
  double diversity_lr = 1e-3;
  double diversity_max_grad_norm = 1.0;
  double jitter_std = 1e-2;
  int probe_states = 256;

  std::vector<double> lambda_arms{0.0, 0.5};
  int grid_shape = 10;
  int queue_capacity = 10;
  int kmeans_restarts = 10;

  // Sequential, bit-reproducible execution; otherwise learners run on
  // separate threads.
  bool deterministic = true;

  rl::PpoConfig ppo;
  rl::AgentOptions agent;
  env::ToyConfig toy;
  env::DogfightConfig dogfight;

  long steps_per_iteration() const { return static_cast<long>(rollout_steps) * eval_interval; }
  long exploit_period_steps() const;
  kernels::KernelOptions kernel_options() const;
};

// Fills environment-dependent defaults and derived counts, then validates.
TrainerConfig resolve(TrainerConfig config);
// Throws std::invalid_argument describing the first violated constraint.
void validate(const TrainerConfig& config);

nlohmann::json to_json(const TrainerConfig& config);
// Unknown keys are rejected; missing keys keep their defaults.
TrainerConfig trainer_config_from_json(const nlohmann::json& j);

using EnvFactory = std::function<std::unique_ptr<env::Environment>()>;
EnvFactory make_env_factory(const TrainerConfig& config);

}  // namespace pdo::train
