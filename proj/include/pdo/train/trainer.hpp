#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdo/archive/archive.hpp"
#include "pdo/rl/rollout.hpp"
#include "pdo/train/bandit.hpp"
#include "pdo/train/config.hpp"

namespace pdo::train {

// One reward-phase learner: its agent plus the environment and random
// stream it alone uses.
struct Learner {
  int id = 0;
  rl::Agent agent;
  std::unique_ptr<env::Environment> env;       // rollouts
  std::unique_ptr<env::Environment> eval_env;  // evaluation episodes
  rl::RolloutCursor cursor;
  std::mt19937_64 rng;
  long steps = 0;
  double fitness = 0.0;  // latest evaluation
  std::vector<double> bd;
  rl::Agent last_evaluated;  // fallback after a failed update
  rl::RolloutBuffer last_buffer;
};

// Ordered JSON-lines sink. Records are kept in memory and optionally streamed.
class MetricsLog {
 public:
  explicit MetricsLog(std::ostream* stream = nullptr) : stream_(stream) {}
  void emit(const nlohmann::json& record);
  std::vector<std::string> lines() const;

 private:
  mutable std::mutex mutex_;
  std::ostream* stream_;
  std::vector<std::string> lines_;
};

struct RunResult {
  archive::Archive archive;
  std::vector<std::string> metrics;  // JSON lines
  nlohmann::json summary;            // final QD metrics (no wall-clock)
};

// Runs the configured trainer end to end. `factory` overrides the
// environment construction (tests); by default it follows the config.
RunResult train(const TrainerConfig& config, MetricsLog& log, EnvFactory factory = {});

RunResult pdo_train(TrainerConfig config, MetricsLog& log, EnvFactory factory = {});
RunResult pbt_train(TrainerConfig config, MetricsLog& log, EnvFactory factory = {});

// Exposed building blocks.
std::vector<Learner> make_learners(const TrainerConfig& config, const EnvFactory& factory,
                                   std::uint64_t seed);
std::uint64_t evaluation_seed(const TrainerConfig& config);
archive::AgentSnapshot snapshot_of(const rl::Agent& agent, const rl::Evaluation& evaluation,
                                   archive::Origin origin, int iteration, int learner_id);

struct ExploitEvent {
  int replaced_learner = -1;
  archive::AgentSnapshot source;
};
// Replaces the live learner with the lowest latest fitness (lowest id on
// ties) by a uniformly sampled archive snapshot.
ExploitEvent exploit_worst(std::vector<Learner>& learners, const archive::Archive& archive,
                           std::mt19937_64& rng);

// Auxiliary phase on archive copies; returns its metrics record.
nlohmann::json auxiliary_phase(const TrainerConfig& config, archive::Archive& archive,
                               const std::vector<Learner>& learners, int iteration,
                               env::Environment& eval_env, std::mt19937_64& rng);

// Writes config.json, metrics.jsonl, archive/ and summary.json.
void write_run_directory(const std::filesystem::path& dir, const TrainerConfig& config,
                         const RunResult& result, double wall_clock_seconds);

}  // namespace pdo::train
