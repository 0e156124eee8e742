#include "pdo/train/config.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace pdo::train {

namespace {

const std::vector<std::pair<TrainerKind, std::string>> kTrainerNames = {
    {TrainerKind::kPdo, "pdo"},     {TrainerKind::kPbt, "pbt"},
    {TrainerKind::kDvd, "dvd"},     {TrainerKind::kDseUcb, "dse-ucb"},
    {TrainerKind::kEdoCs, "edo-cs"}, {TrainerKind::kPpoSingle, "ppo-single"}};

nlohmann::json agent_to_json(const rl::AgentOptions& a) {
  return {{"hidden", a.hidden},
          {"activation", policy::to_string(a.activation)},
          {"optimizer", rl::to_string(a.optimizer)},
          {"scale_rewards", a.scale_rewards},
          {"log_std_init", a.init.log_std_init}};
}

rl::AgentOptions agent_from_json(const nlohmann::json& j) {
  rl::AgentOptions a;
  a.hidden = j.value("hidden", a.hidden);
  if (j.contains("activation")) {
    a.activation = policy::activation_from_string(j.at("activation").get<std::string>());
  }
  if (j.contains("optimizer")) {
    a.optimizer = rl::optimizer_from_string(j.at("optimizer").get<std::string>());
  }
  a.scale_rewards = j.value("scale_rewards", a.scale_rewards);
  a.init.log_std_init = j.value("log_std_init", a.init.log_std_init);
  return a;
}

}  // namespace

std::string to_string(TrainerKind kind) {
  for (const auto& [k, name] : kTrainerNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

TrainerKind trainer_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kTrainerNames) {
    if (n == name) return k;
  }
  throw std::invalid_argument("unknown trainer: " + name);
}

std::string to_string(EnvKind kind) { return kind == EnvKind::kDogfight ? "dogfight" : "toy"; }

EnvKind env_kind_from_string(const std::string& name) {
  if (name == "dogfight") return EnvKind::kDogfight;
  if (name == "toy") return EnvKind::kToy;
  throw std::invalid_argument("unknown environment: " + name);
}

long TrainerConfig::exploit_period_steps() const {
  if (!std::isfinite(exploit_period)) return -1;
  return std::max(1L, std::lround(exploit_period * scale));
}

kernels::KernelOptions TrainerConfig::kernel_options() const {
  kernels::KernelOptions k;
  k.metric = metric;
  k.deterministic = deterministic_kernel == 1;
  k.variance_normalization = variance_normalization;
  k.rbf_sigma_sq = rbf_sigma_sq;
  return k;
}

TrainerConfig resolve(TrainerConfig c) {
  const bool dogfight = c.env == EnvKind::kDogfight;
  if (c.rollout_steps == 0) c.rollout_steps = dogfight ? 1000 : 500;
  if (c.eval_interval == 0) c.eval_interval = dogfight ? 25 : 10;
  if (c.deterministic_kernel < 0) c.deterministic_kernel = dogfight ? 1 : 0;
  if (c.trainer == TrainerKind::kPpoSingle) c.population = 1;
  if (c.trainer == TrainerKind::kPbt) c.diversity_iters = 0;
  if (c.iterations == 0 && c.rollout_steps > 0 && c.eval_interval > 0) {
    const double budget = c.total_steps * c.scale;
    c.iterations = std::max(
        1, static_cast<int>(std::ceil(budget / static_cast<double>(c.steps_per_iteration()) - 1e-9)));
  }
  validate(c);
  return c;
}

void validate(const TrainerConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (c.trainer == TrainerKind::kPpoSingle) {
    if (c.population != 1) fail("ppo-single runs exactly one learner");
  } else if (c.population < 2) {
    fail("population must be >= 2");
  }
  if (!(c.scale > 0.0) || !std::isfinite(c.scale)) fail("scale must be positive");
  if (!(c.total_steps > 0.0)) fail("total_steps must be positive");
  if (!(c.exploit_period > 0.0)) fail("exploit_period must be positive");
  if (c.iterations < 1) fail("iterations must be >= 1");
  if (c.rollout_steps < 1) fail("rollout_steps must be >= 1");
  if (c.eval_interval < 1) fail("eval_interval must be >= 1");
  if (c.eval_episodes < 1) fail("eval_episodes must be >= 1");
  if (c.diversity_iters < 0) fail("diversity_iters must be >= 0");
  if (!(c.beta > 0.0 && c.beta < 1.0)) fail("beta must lie in (0, 1)");
  if (c.probe_states < 1) fail("probe_states must be >= 1");
  if (c.lambda_arms.empty()) fail("lambda_arms must be non-empty");
  for (double l : c.lambda_arms) {
    if (!(l >= 0.0 && l <= 1.0)) fail("lambda arms must lie in [0, 1]");
  }
  if (c.grid_shape < 1 || c.queue_capacity < 1) fail("archive dimensions must be positive");
  if (c.diversity_lr < 0.0) fail("diversity_lr must be >= 0");
  if (c.jitter_std < 0.0) fail("jitter_std must be >= 0");
  if (c.agent.hidden.empty()) fail("agent.hidden must list at least one layer");
  for (int h : c.agent.hidden) {
    if (h < 1) fail("hidden layer widths must be positive");
  }
  if (c.ppo.epochs < 1 || c.ppo.num_minibatches < 1) fail("ppo epochs/minibatches must be >= 1");
  if (c.metric == kernels::Metric::kJsd) fail("jsd metric requires a discrete action space");
  if (c.archive == archive::ArchiveKind::kGrid && c.env == EnvKind::kToy && c.toy.goals.size() < 2) {
    fail("toy environment needs at least two goals");
  }
  if (c.kmeans_restarts < 1) fail("kmeans_restarts must be >= 1");
}

nlohmann::json to_json(const TrainerConfig& c) {
  nlohmann::json j = {{"trainer", to_string(c.trainer)},
                      {"env", to_string(c.env)},
                      {"archive", archive::to_string(c.archive)},
                      {"seed", c.seed},
                      {"population", c.population},
                      {"scale", c.scale},
                      {"total_steps", c.total_steps},
                      {"exploit_period", std::isfinite(c.exploit_period)
                                             ? nlohmann::json(c.exploit_period)
                                             : nlohmann::json("inf")},
                      {"iterations", c.iterations},
                      {"rollout_steps", c.rollout_steps},
                      {"eval_interval", c.eval_interval},
                      {"eval_episodes", c.eval_episodes},
                      {"diversity_iters", c.diversity_iters},
                      {"beta", c.beta},
                      {"metric", kernels::to_string(c.metric)},
                      {"deterministic_kernel", c.deterministic_kernel},
                      {"variance_normalization", c.variance_normalization},
                      {"rbf_sigma_sq", c.rbf_sigma_sq},
                      {"diversity_lr", c.diversity_lr},
                      {"diversity_max_grad_norm", c.diversity_max_grad_norm},
                      {"jitter_std", c.jitter_std},
                      {"probe_states", c.probe_states},
                      {"lambda_arms", c.lambda_arms},
                      {"grid_shape", c.grid_shape},
                      {"queue_capacity", c.queue_capacity},
                      {"kmeans_restarts", c.kmeans_restarts},
                      {"deterministic", c.deterministic},
                      {"ppo", rl::to_json(c.ppo)},
                      {"agent", agent_to_json(c.agent)},
                      {"toy", env::to_json(c.toy)},
                      {"dogfight", env::to_json(c.dogfight)}};
  return j;
}

TrainerConfig trainer_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
      "trainer",      "env",           "archive",         "seed",
      "population",   "scale",         "total_steps",     "exploit_period",
      "iterations",   "rollout_steps", "eval_interval",   "eval_episodes",
      "diversity_iters", "beta",       "metric",          "deterministic_kernel",
      "variance_normalization", "rbf_sigma_sq", "diversity_lr", "diversity_max_grad_norm",
      "jitter_std",   "probe_states",  "lambda_arms",     "grid_shape",
      "queue_capacity", "kmeans_restarts", "deterministic", "ppo",
      "agent",        "toy",           "dogfight",        "seeds"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
  }
  TrainerConfig c;
  if (j.contains("trainer")) c.trainer = trainer_kind_from_string(j.at("trainer").get<std::string>());
  if (j.contains("env")) c.env = env_kind_from_string(j.at("env").get<std::string>());
  if (j.contains("archive")) {
    c.archive = archive::archive_kind_from_string(j.at("archive").get<std::string>());
  }
  if (j.contains("metric")) c.metric = kernels::metric_from_string(j.at("metric").get<std::string>());
  if (j.contains("exploit_period") && j.at("exploit_period").is_string()) {
    if (j.at("exploit_period").get<std::string>() != "inf") {
      throw std::invalid_argument("exploit_period must be a number or \"inf\"");
    }
    c.exploit_period = std::numeric_limits<double>::infinity();
  } else {
    c.exploit_period = j.value("exploit_period", c.exploit_period);
  }
#define PDO_READ(field) c.field = j.value(#field, c.field)
  PDO_READ(seed);
  PDO_READ(population);
  PDO_READ(scale);
  PDO_READ(total_steps);
  PDO_READ(iterations);
  PDO_READ(rollout_steps);
  PDO_READ(eval_interval);
  PDO_READ(eval_episodes);
  PDO_READ(diversity_iters);
  PDO_READ(beta);
  PDO_READ(deterministic_kernel);
  PDO_READ(variance_normalization);
  PDO_READ(rbf_sigma_sq);
  PDO_READ(diversity_lr);
  PDO_READ(diversity_max_grad_norm);
  PDO_READ(jitter_std);
  PDO_READ(probe_states);
  PDO_READ(lambda_arms);
  PDO_READ(grid_shape);
  PDO_READ(queue_capacity);
  PDO_READ(kmeans_restarts);
  PDO_READ(deterministic);
#undef PDO_READ
  if (j.contains("ppo")) c.ppo = rl::ppo_config_from_json(j.at("ppo"));
  if (j.contains("agent")) c.agent = agent_from_json(j.at("agent"));
  if (j.contains("toy")) c.toy = env::toy_config_from_json(j.at("toy"));
  if (j.contains("dogfight")) c.dogfight = env::dogfight_config_from_json(j.at("dogfight"));
  c.agent.gamma = c.ppo.gamma;
  return c;
}

EnvFactory make_env_factory(const TrainerConfig& config) {
  if (config.env == EnvKind::kDogfight) {
    return [cfg = config.dogfight] { return std::make_unique<env::DogfightEnv>(cfg); };
  }
  return [cfg = config.toy] { return std::make_unique<env::ToyEnv>(cfg); };
}

}  // namespace pdo::train
