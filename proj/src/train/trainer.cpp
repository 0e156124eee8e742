#include "pdo/train/trainer.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "pdo/train/clustering.hpp"
#include "pdo/train/diversity.hpp"

namespace pdo::train {

namespace {

using archive::AgentSnapshot;
using archive::Archive;
using archive::Origin;

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

bool is_bandit_trainer(TrainerKind k) { return k == TrainerKind::kDvd || k == TrainerKind::kDseUcb; }

// Runs `work(i)` for every index, sequentially or one thread per index.
template <typename Work>
void for_each_learner(std::size_t n, bool parallel, Work work) {
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct StatsAccumulator {
  rl::PpoStats sum;
  int count = 0;
  bool aborted = false;

  void add(const rl::PpoStats& s) {
    aborted |= s.aborted;
    if (s.aborted) return;
    sum.policy_loss += s.policy_loss;
    sum.value_loss += s.value_loss;
    sum.entropy += s.entropy;
    sum.approx_kl += s.approx_kl;
    sum.clip_fraction += s.clip_fraction;
    sum.updates += s.updates;
    ++count;
  }
  nlohmann::json json() const {
    rl::PpoStats m = sum;
    if (count > 0) {
      m.policy_loss /= count;
      m.value_loss /= count;
      m.entropy /= count;
      m.approx_kl /= count;
      m.clip_fraction /= count;
    }
    m.aborted = aborted;
    return rl::to_json(m);
  }
};

struct LearnerOutcome {
  StatsAccumulator stats;
  bool reverted = false;
  archive::AddResult result = archive::AddResult::kRejected;
};

void evaluate_and_offer(const TrainerConfig& config, Learner& l, Archive& archive, int iteration,
                        std::uint64_t eval_seed, LearnerOutcome& outcome) {
  const rl::Evaluation ev =
      rl::evaluate(l.agent, *l.eval_env, config.eval_episodes, true, eval_seed, l.rng);
  l.fitness = ev.fitness;
  l.bd = ev.bd;
  l.last_evaluated = l.agent;
  auto snap = snapshot_of(l.agent, ev, Origin::kRewardPhase, iteration, l.id);
  if (config.archive == archive::ArchiveKind::kQueue) snap.bd.clear();
  outcome.result = archive.add(std::move(snap));
}

nlohmann::json learner_record(const Learner& l, int iteration, const LearnerOutcome* outcome) {
  nlohmann::json r = {{"type", "learner"},
                      {"iteration", iteration},
                      {"learner_id", l.id},
                      {"steps", l.steps},
                      {"fitness", number_or_null(l.fitness)},
                      {"bd", l.bd}};
  if (outcome) {
    r["archive_result"] = archive::to_string(outcome->result);
    r["losses"] = outcome->stats.json();
    r["reverted"] = outcome->reverted;
  } else {
    r["archive_result"] = nullptr;
  }
  return r;
}

nlohmann::json archive_record(const Archive& archive, int iteration, long total_steps) {
  const auto m = archive.qd_metrics();
  return {{"type", "archive"},
          {"iteration", iteration},
          {"total_steps", total_steps},
          {"max_fitness", number_or_null(m.max_fitness)},
          {"min_fitness", number_or_null(m.min_fitness)},
          {"qd_score", m.qd_score},
          {"coverage", m.coverage}};
}

std::vector<rl::RolloutBuffer> last_buffers(const std::vector<Learner>& learners) {
  std::vector<rl::RolloutBuffer> out;
  for (const auto& l : learners) {
    if (l.last_buffer.size() > 0) out.push_back(l.last_buffer);
  }
  return out;
}

}  // namespace

void MetricsLog::emit(const nlohmann::json& record) {
  std::string line = record.dump();
  std::lock_guard lock(mutex_);
  if (stream_) *stream_ << line << '\n';
  lines_.push_back(std::move(line));
}

std::vector<std::string> MetricsLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

std::uint64_t evaluation_seed(const TrainerConfig& config) {
  return seeded(config.seed, 0xe7a1)();
}

AgentSnapshot snapshot_of(const rl::Agent& agent, const rl::Evaluation& evaluation, Origin origin,
                          int iteration, int learner_id) {
  return AgentSnapshot{agent, evaluation.fitness, evaluation.bd, origin, iteration, learner_id, 0};
}

std::vector<Learner> make_learners(const TrainerConfig& config, const EnvFactory& factory,
                                   std::uint64_t seed) {
  std::vector<Learner> out;
  for (int i = 0; i < config.population; ++i) {
    auto rng = seeded(seed, 1000 + static_cast<std::uint64_t>(i));
    auto env = factory();
    auto eval_env = factory();
    rl::Agent agent = rl::Agent::create(env->obs_dim(), env->action_space(), config.agent, rng);
    rl::Agent copy = agent;
    out.push_back(Learner{i, std::move(agent), std::move(env), std::move(eval_env), {},
                          std::move(rng), 0, 0.0, {}, std::move(copy), {}});
  }
  return out;
}

ExploitEvent exploit_worst(std::vector<Learner>& learners, const Archive& archive,
                           std::mt19937_64& rng) {
  if (learners.empty()) throw std::invalid_argument("exploit_worst: no learners");
  std::size_t worst = 0;
  for (std::size_t i = 1; i < learners.size(); ++i) {
    if (learners[i].fitness < learners[worst].fitness) worst = i;
  }
  ExploitEvent ev{static_cast<int>(worst), archive.sample_uniform(rng)};
  Learner& l = learners[worst];
  l.agent = ev.source.agent;
  l.last_evaluated = ev.source.agent;
  l.fitness = ev.source.fitness;
  l.bd = ev.source.bd;
  l.cursor = {};
  return ev;
}

nlohmann::json auxiliary_phase(const TrainerConfig& config, Archive& archive,
                               const std::vector<Learner>& learners, int iteration,
                               env::Environment& eval_env, std::mt19937_64& rng) {
  nlohmann::json record = {{"type", "auxiliary"}, {"iteration", iteration}};
  const auto buffers = last_buffers(learners);
  if (buffers.empty() || archive.size() == 0) {
    record["skipped"] = true;
    return record;
  }
  archive::TopM selected = archive.top_m(config.population);
  const auto probe = sample_probe_states(buffers, config.probe_states, rng);
  std::vector<const rl::Agent*> agents;
  std::vector<policy::Policy> policies;
  for (const auto& s : selected.agents) {
    agents.push_back(&s.agent);
    policies.push_back(s.agent.policy);
  }
  const auto batches = per_agent_batches(agents, probe);
  DiversifyOptions options;
  options.kernel = config.kernel_options();
  options.ascent.learning_rate = config.diversity_lr;
  options.ascent.max_grad_norm = config.diversity_max_grad_norm;
  options.ascent.beta = config.beta;
  options.iterations = config.diversity_iters;
  options.jitter_std = config.jitter_std;
  DiversifyResult res = diversify(std::move(policies), batches, options, rng);

  const std::uint64_t eval_seed = evaluation_seed(config);
  nlohmann::json outcomes = nlohmann::json::array();
  for (std::size_t k = 0; k < selected.agents.size(); ++k) {
    AgentSnapshot snap = selected.agents[k];
    const std::uint64_t source = snap.sequence;
    snap.agent.policy = std::move(res.policies[k]);
    const rl::Evaluation ev =
        rl::evaluate(snap.agent, eval_env, config.eval_episodes, true, eval_seed, rng);
    snap.fitness = ev.fitness;
    snap.bd = config.archive == archive::ArchiveKind::kQueue ? std::vector<double>{} : ev.bd;
    snap.origin = Origin::kAuxiliaryPhase;
    snap.iteration = iteration;
    snap.learner_id = -1;
    const auto result = archive.add(snap);
    outcomes.push_back({{"source_sequence", source},
                        {"fitness", ev.fitness},
                        {"bd", ev.bd},
                        {"archive_result", archive::to_string(result)}});
  }
  std::vector<double> pairwise;
  for (Eigen::Index i = 0; i < res.final_distances.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < res.final_distances.cols(); ++j) {
      pairwise.push_back(res.final_distances(i, j));
    }
  }
  record["padded"] = selected.padded;
  record["beta"] = res.beta;
  record["det_trace"] = res.det_trace;
  record["jittered"] = res.jittered;
  record["pairwise_distances"] = pairwise;
  record["agents"] = outcomes;
  return record;
}

RunResult train(const TrainerConfig& input, MetricsLog& log, EnvFactory factory) {
  const TrainerConfig config = resolve(input);
  if (!factory) factory = make_env_factory(config);
  const bool parallel = !config.deterministic;
  std::mt19937_64 master = seeded(config.seed, 7);
  std::vector<Learner> learners = make_learners(config, factory, config.seed);
  auto aux_env = factory();
  Archive archive(config.archive, aux_env->qd_offset(), config.grid_shape, config.queue_capacity);
  const std::uint64_t eval_seed = evaluation_seed(config);
  const std::size_t m = learners.size();

  {
    std::vector<LearnerOutcome> outcomes(m);
    for_each_learner(m, parallel, [&](std::size_t i) {
      evaluate_and_offer(config, learners[i], archive, 0, eval_seed, outcomes[i]);
    });
    for (std::size_t i = 0; i < m; ++i) {
      nlohmann::json r = learner_record(learners[i], 0, nullptr);
      r["archive_result"] = archive::to_string(outcomes[i].result);
      log.emit(r);
    }
    log.emit(archive_record(archive, 0, 0));
  }

  BanditState bandit = BanditState::create(config.lambda_arms);
  observe_best(bandit, archive.qd_metrics().max_fitness);
  const long exploit_period = config.exploit_period_steps();
  long since_exploit = 0;

  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<LearnerOutcome> outcomes(m);
    double lambda = 0.0;
    if (is_bandit_trainer(config.trainer)) {
      const int arm = config.trainer == TrainerKind::kDvd ? thompson_select(bandit, master)
                                                         : ucb_select(bandit);
      lambda = config.lambda_arms[arm];
    }

    if (is_bandit_trainer(config.trainer)) {
      for (int p = 0; p < config.eval_interval; ++p) {
        std::vector<rl::RolloutBuffer> buffers(m);
        for_each_learner(m, parallel, [&](std::size_t i) {
          Learner& l = learners[i];
          buffers[i] = rl::collect_rollout(l.agent, *l.env, l.cursor, config.rollout_steps, l.rng,
                                           l.id);
          l.steps += config.rollout_steps;
        });
        std::vector<Observation> probe;
        if (lambda > 0.0) probe = sample_probe_states(buffers, config.probe_states, master);
        std::vector<rl::Agent*> agents;
        std::vector<std::mt19937_64*> rngs;
        for (auto& l : learners) {
          agents.push_back(&l.agent);
          rngs.push_back(&l.rng);
        }
        DvdOptions options{lambda, config.beta, config.kernel_options()};
        const auto stats = dvd_update(agents, buffers, probe, config.ppo, options, rngs);
        for (std::size_t i = 0; i < m; ++i) {
          outcomes[i].stats.add(stats[i]);
          if (stats[i].aborted) {
            learners[i].agent = learners[i].last_evaluated;
            outcomes[i].reverted = true;
          }
          learners[i].last_buffer = std::move(buffers[i]);
        }
      }
    } else {
      for_each_learner(m, parallel, [&](std::size_t i) {
        Learner& l = learners[i];
        for (int p = 0; p < config.eval_interval; ++p) {
          l.last_buffer = rl::collect_rollout(l.agent, *l.env, l.cursor, config.rollout_steps,
                                              l.rng, l.id);
          l.steps += config.rollout_steps;
          const rl::PpoStats s = rl::ppo_update(l.agent, l.last_buffer, config.ppo, l.rng);
          outcomes[i].stats.add(s);
          if (s.aborted) {
            l.agent = l.last_evaluated;
            outcomes[i].reverted = true;
          }
        }
      });
    }

    for_each_learner(m, parallel, [&](std::size_t i) {
      evaluate_and_offer(config, learners[i], archive, it, eval_seed, outcomes[i]);
    });
    for (std::size_t i = 0; i < m; ++i) {
      nlohmann::json r = learner_record(learners[i], it, &outcomes[i]);
      if (is_bandit_trainer(config.trainer)) r["lambda"] = lambda;
      log.emit(r);
    }

    since_exploit += config.steps_per_iteration();
    if (m > 1 && exploit_period > 0 && since_exploit >= exploit_period) {
      since_exploit = 0;
      if (config.trainer == TrainerKind::kEdoCs) {
        std::vector<AgentSnapshot> candidates = archive.entries();
        for (const auto& l : learners) {
          candidates.push_back(AgentSnapshot{l.agent, l.fitness, l.bd, Origin::kRewardPhase, it,
                                             l.id, std::numeric_limits<std::uint64_t>::max()});
        }
        const auto probe = sample_probe_states(last_buffers(learners), config.probe_states, master);
        ClusteringSelection sel =
            clustering_selection(candidates, static_cast<int>(m), probe, master,
                                 config.kmeans_restarts);
        nlohmann::json picked = nlohmann::json::array();
        for (std::size_t i = 0; i < m; ++i) {
          Learner& l = learners[i];
          l.agent = sel.selected[i].agent;
          l.last_evaluated = l.agent;
          l.fitness = sel.selected[i].fitness;
          l.bd = sel.selected[i].bd;
          l.cursor = {};
          picked.push_back(sel.selected[i].fitness);
        }
        log.emit({{"type", "exploit"},
                  {"iteration", it},
                  {"mode", "clustering"},
                  {"fell_back", sel.fell_back},
                  {"fitness", picked}});
      } else {
        const ExploitEvent ev = exploit_worst(learners, archive, master);
        log.emit({{"type", "exploit"},
                  {"iteration", it},
                  {"mode", "replace_worst"},
                  {"replaced_learner", ev.replaced_learner},
                  {"source_sequence", ev.source.sequence},
                  {"source_fitness", ev.source.fitness}});
      }
    }

    if (config.trainer == TrainerKind::kPdo && config.diversity_iters > 0) {
      log.emit(auxiliary_phase(config, archive, learners, it, *aux_env, master));
    }

    if (is_bandit_trainer(config.trainer)) {
      const bool improved = observe_best(bandit, archive.qd_metrics().max_fitness);
      bandit_update(bandit, improved);
      nlohmann::json r = to_json(bandit);
      r["type"] = "bandit";
      r["iteration"] = it;
      r["lambda"] = lambda;
      r["improved"] = improved;
      log.emit(r);
    }

    long total = 0;
    for (const auto& l : learners) total += l.steps;
    log.emit(archive_record(archive, it, total));
  }

  const auto metrics = archive.qd_metrics();
  long total = 0;
  for (const auto& l : learners) total += l.steps;
  nlohmann::json summary = {{"trainer", to_string(config.trainer)},
                            {"env", to_string(config.env)},
                            {"archive", archive::to_string(config.archive)},
                            {"seed", config.seed},
                            {"iterations", config.iterations},
                            {"total_steps", total},
                            {"max_fitness", number_or_null(metrics.max_fitness)},
                            {"min_fitness", number_or_null(metrics.min_fitness)},
                            {"qd_score", metrics.qd_score},
                            {"coverage", metrics.coverage}};
  return RunResult{std::move(archive), log.lines(), std::move(summary)};
}

RunResult pdo_train(TrainerConfig config, MetricsLog& log, EnvFactory factory) {
  config.trainer = TrainerKind::kPdo;
  return train(config, log, std::move(factory));
}

RunResult pbt_train(TrainerConfig config, MetricsLog& log, EnvFactory factory) {
  config.trainer = TrainerKind::kPbt;
  return train(config, log, std::move(factory));
}

void write_run_directory(const std::filesystem::path& dir, const TrainerConfig& config,
                         const RunResult& result, double wall_clock_seconds) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "config.json") << to_json(resolve(config)).dump(2) << '\n';
  {
    std::ofstream metrics(dir / "metrics.jsonl");
    for (const auto& line : result.metrics) metrics << line << '\n';
    if (!metrics) throw std::runtime_error("cannot write " + (dir / "metrics.jsonl").string());
  }
  result.archive.save(dir / "archive");
  nlohmann::json summary = result.summary;
  summary["wall_clock_seconds"] = wall_clock_seconds;
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
}

}  // namespace pdo::train
