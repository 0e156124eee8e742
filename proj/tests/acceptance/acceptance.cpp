#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdo/det/determinant.hpp"
#include "pdo/det/diversity_objective.hpp"
#include "pdo/env/dogfight.hpp"
#include "pdo/env/toy.hpp"
#include "pdo/kernels/divergence.hpp"
#include "pdo/kernels/dse.hpp"
#include "pdo/train/bandit.hpp"
#include "pdo/train/diversity.hpp"
#include "pdo/train/trainer.hpp"
#include "support.hpp"

using namespace pdo;
using nlohmann::json;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Relative agreement with an absolute floor.
bool grad_close(double analytic, double numeric, double rel, double floor) {
  return std::abs(analytic - numeric) <=
         std::max(floor, rel * std::max(std::abs(analytic), std::abs(numeric)));
}

// ---------------------------------------------------------------------------

void math_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst_det = 0.0;
  bool det_ok = true;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 5;
    const Eigen::MatrixXd a = testing::random_spd(n, rng);
    const double ref = testing::cofactor_det(a);
    const double got = det::det_via_cholesky(det::cholesky(a));
    const double err = std::abs(got - ref) / std::max(1.0, std::abs(ref));
    worst_det = std::max(worst_det, err);
    det_ok = det_ok && err <= 1e-8;
  }

  int det_grad_bad = 0;
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int t = 0; t < 100; ++t) {
    const int m = 2 + t % 5;
    const double beta = std::vector<double>{0.5, 0.9, 0.99}[t % 3];
    const Eigen::MatrixXd base = testing::random_unit_kernel(m, rng);
    std::vector<Eigen::MatrixXd> dirs;
    for (int p = 0; p < 3; ++p) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) b(i, j) = b(j, i) = u(rng);
      dirs.push_back(b);
    }
    auto kernel_at = [&](const std::vector<double>& theta) {
      Eigen::MatrixXd k = base;
      for (std::size_t p = 0; p < theta.size(); ++p) k += theta[p] * dirs[p];
      return k;
    };
    const std::vector<double> theta(3, 0.0);
    const auto grad = det::det_gradient(det::surrogate(kernel_at(theta), beta), dirs);
    auto f = [&](const std::vector<double>& x) {
      return testing::cofactor_det(det::surrogate(kernel_at(x), beta).entries);
    };
    std::vector<double> numeric(3);
    double scale = 0.0;
    for (std::size_t p = 0; p < 3; ++p) {
      numeric[p] = testing::central_difference(f, theta, p);
      scale = std::max(scale, std::abs(numeric[p]));
    }
    bool ok = true;
    for (std::size_t p = 0; p < 3; ++p) ok = ok && grad_close(grad[p], numeric[p], 1e-4, 1e-8 * scale + 1e-12);
    det_grad_bad += ok ? 0 : 1;
  }

  int aux_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const int m = 2 + t % 3;
    const bool discrete = t % 4 == 3;
    kernels::StateBatch batch;
    batch.states = testing::random_states(6, 3, rng);
    const kernels::StateBatch batches[1] = {batch};
    std::vector<policy::Policy> pop;
    for (int i = 0; i < m; ++i) {
      pop.push_back(discrete ? testing::random_discrete_policy(3, 3, rng, {4})
                             : testing::random_gaussian_policy(3, 2, rng, {4}));
    }
    kernels::KernelOptions options;
    options.metric = discrete ? kernels::Metric::kJsd : kernels::Metric::kW2;
    const auto target = t % 2 == 0 ? det::GradientTarget::kDet : det::GradientTarget::kLogDet;
    const auto objective = det::auxiliary_objective(pop, batches, options, 0.99, target);
    kernels::KernelOptions fixed = options;
    if (!discrete) {
      fixed.variance_normalization = false;
      fixed.rbf_sigma_sq = options.rbf_sigma_sq * objective.normalization_scale;
    }
    std::vector<std::vector<double>> numeric(m);
    double scale = 0.0;
    for (int p = 0; p < m; ++p) {
      const std::vector<double> x(pop[p].params().begin(), pop[p].params().end());
      for (std::size_t k = 0; k < x.size(); ++k) {
        auto f = [&](const std::vector<double>& y) {
          auto copy = pop;
          std::copy(y.begin(), y.end(), copy[p].mutable_params().begin());
          const auto kernel = kernels::build_kernel_matrix(copy, batches, fixed);
          const double d = testing::cofactor_det(det::surrogate(kernel, objective.beta).entries);
          return target == det::GradientTarget::kDet ? d : std::log(d);
        };
        numeric[p].push_back(testing::central_difference(f, x, k));
        scale = std::max(scale, std::abs(numeric[p].back()));
      }
    }
    bool ok = true;
    for (int p = 0; p < m; ++p)
      for (std::size_t k = 0; k < numeric[p].size(); ++k)
        ok = ok && grad_close(objective.grads[p][k], numeric[p][k], 1e-4, 1e-6 * scale + 1e-12);
    aux_bad += ok ? 0 : 1;
  }
  const double secs = seconds_since(start);
  report(1, "math oracles", det_ok && det_grad_bad == 0 && aux_bad == 0 && secs < 60.0,
         fmt("det max rel err %.2e over 1000; det_gradient mismatches %d/100; "
             "auxiliary_objective mismatches %d/100; %.1fs",
             worst_det, det_grad_bad, aux_bad, secs));
}

// ---------------------------------------------------------------------------

void surrogate_lower_bound() {
  std::mt19937_64 rng(202);
  const double betas[] = {0.1, 0.5, 0.9, 0.99};
  int violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 1000; ++t) {
    const int m = 2 + t % 5;
    const double beta = betas[(t / 5) % 4];
    const Eigen::MatrixXd k = testing::random_unit_kernel(m, rng);
    const double d = det::det_via_cholesky(det::cholesky(det::surrogate(k, beta).entries));
    const double margin = d - det::surrogate_det_lower_bound(m, beta);
    min_margin = std::min(min_margin, margin);
    violations += margin < -1e-10 ? 1 : 0;
  }
  double worst_equality = 0.0;
  for (int m = 2; m <= 6; ++m) {
    for (double beta : betas) {
      const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(m, m);
      const double d = det::det_via_cholesky(det::cholesky(det::surrogate(ones, beta).entries));
      const double expected = (1.0 - beta + m * beta) * std::pow(1.0 - beta, m - 1);
      worst_equality = std::max(worst_equality, std::abs(d - expected));
      worst_equality =
          std::max(worst_equality, std::abs(det::surrogate_det_lower_bound(m, beta) - expected));
    }
  }
  const double example = det::surrogate_det_lower_bound(2, 0.5);
  report(2, "surrogate lower bound",
         violations == 0 && worst_equality <= 1e-10 && std::abs(example - 0.75) <= 1e-10,
         fmt("violations %d/1000 (min margin %.3e); all-ones max gap %.2e; M=2 beta=0.5 -> %.12f",
             violations, min_margin, worst_equality, example));
}

// ---------------------------------------------------------------------------

void repulsion() {
  train::TrainerConfig c;
  c.env = train::EnvKind::kToy;
  c.population = 3;
  c = train::resolve(c);
  auto learners = train::make_learners(c, train::make_env_factory(c), 7);
  std::vector<rl::RolloutBuffer> buffers;
  auto& first = learners[0];
  buffers.push_back(rl::collect_rollout(first.agent, *first.env, first.cursor, 256, first.rng, 0));
  for (auto& l : learners) l.agent = first.agent;
  std::vector<const rl::Agent*> agents;
  std::vector<policy::Policy> policies;
  for (auto& l : learners) {
    agents.push_back(&l.agent);
    policies.push_back(l.agent.policy);
  }
  std::mt19937_64 rng(303);
  const auto probe = train::sample_probe_states(buffers, c.probe_states, rng);
  const auto batches = train::per_agent_batches(agents, probe);
  train::DiversifyOptions options;
  options.kernel = c.kernel_options();
  options.iterations = 20;
  const auto result = train::diversify(policies, batches, options, rng);
  const auto& trace = result.det_trace;
  bool monotone = true;
  for (std::size_t i = 1; i < trace.size(); ++i) monotone = monotone && trace[i] >= trace[i - 1] - 1e-12;
  const bool increased = trace.back() > trace.front();
  double min_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) min_dist = std::min(min_dist, result.final_distances(i, j));
  const double floor = det::surrogate_det_lower_bound(3, options.ascent.beta);
  const bool started_at_floor = std::abs(trace.front() - floor) <= 1e-10;
  const bool ok = started_at_floor && monotone && increased && trace.size() >= 21 && min_dist > 0.0;
  report(3, "repulsion from identical policies", ok,
         fmt("det %.6e (duplicate floor %.6e) -> %.6e over %zu trace points, jittered %zu, "
             "monotone=%s, min pairwise W2^2 %.3e",
             trace.front(), floor, trace.back(), trace.size(), result.jittered.size(),
             monotone ? "yes" : "no", min_dist));
}

// ---------------------------------------------------------------------------

struct TrainingChecks {
  std::vector<std::pair<std::string, std::vector<std::string>>> logs;
};

bool max_fitness_monotone(const std::vector<std::string>& lines, std::string* where) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& line : lines) {
    const json r = json::parse(line);
    if (r.at("type") != "archive") continue;
    const auto& v = r.at("max_fitness");
    if (v.is_null()) continue;
    const double now = v.get<double>();
    if (now < best) {
      *where = fmt("iteration %d: %.6f < %.6f", r.at("iteration").get<int>(), now, best);
      return false;
    }
    best = now;
  }
  return true;
}

train::TrainerConfig desk_config(train::TrainerKind kind, std::uint64_t seed) {
  train::TrainerConfig c;
  c.trainer = kind;
  c.env = train::EnvKind::kToy;
  c.population = 3;
  c.scale = 1.0 / 50.0;
  c.seed = seed;
  c.deterministic = true;
  return c;
}

void training_criteria() {
  TrainingChecks checks;

  // Criterion 6 runs; seed 0 of PBT doubles as the reference for criterion 4.
  const auto start6 = std::chrono::steady_clock::now();
  double cov[2] = {0, 0}, qd[2] = {0, 0}, mx[2] = {0, 0};
  std::vector<std::string> pbt_seed0;
  const train::TrainerKind kinds[2] = {train::TrainerKind::kPdo, train::TrainerKind::kPbt};
  for (int k = 0; k < 2; ++k) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      train::MetricsLog log;
      const auto r = train::train(desk_config(kinds[k], seed), log);
      const auto m = r.archive.qd_metrics();
      cov[k] += m.coverage / 5.0;
      qd[k] += m.qd_score / 5.0;
      mx[k] += m.max_fitness / 5.0;
      checks.logs.emplace_back(train::to_string(kinds[k]) + " toy seed " + std::to_string(seed),
                               r.metrics);
      if (k == 1 && seed == 0) pbt_seed0 = r.metrics;
    }
  }
  const double secs6 = seconds_since(start6);

  // Criterion 4.
  auto ablation = desk_config(train::TrainerKind::kPdo, 0);
  ablation.diversity_iters = 0;
  train::MetricsLog ablation_log;
  const auto ab = train::train(ablation, ablation_log);
  checks.logs.emplace_back("pdo(diversity_iters=0) toy seed 0", ab.metrics);
  std::size_t first_diff = 0;
  while (first_diff < std::min(ab.metrics.size(), pbt_seed0.size()) &&
         ab.metrics[first_diff] == pbt_seed0[first_diff]) {
    ++first_diff;
  }
  const bool identical = ab.metrics == pbt_seed0 && !pbt_seed0.empty();
  report(4, "ablation identity", identical,
         identical ? fmt("%zu metrics lines bit-identical", pbt_seed0.size())
                   : fmt("logs differ at line %zu (%zu vs %zu lines)", first_diff,
                         ab.metrics.size(), pbt_seed0.size()));

  // Criterion 5: every trainer on both environments and both archive kinds.
  for (auto kind : {train::TrainerKind::kPdo, train::TrainerKind::kPbt, train::TrainerKind::kDvd,
                    train::TrainerKind::kDseUcb, train::TrainerKind::kEdoCs,
                    train::TrainerKind::kPpoSingle}) {
    for (auto env : {train::EnvKind::kToy, train::EnvKind::kDogfight}) {
      train::TrainerConfig c;
      c.trainer = kind;
      c.env = env;
      c.population = 3;
      c.scale = 1.0;
      c.rollout_steps = 256;
      c.eval_interval = 1;
      c.eval_episodes = 2;
      c.total_steps = 256 * 6;
      c.exploit_period = 512;
      c.probe_states = 64;
      c.kmeans_restarts = 2;
      c.diversity_iters = 5;
      c.agent.hidden = {16};
      c.seed = 3;
      if (env == train::EnvKind::kDogfight) c.dogfight.max_steps = 300;
      if (kind == train::TrainerKind::kPbt) c.archive = archive::ArchiveKind::kQueue;
      train::MetricsLog log;
      const auto r = train::train(c, log);
      checks.logs.emplace_back(train::to_string(kind) + " " + train::to_string(env), r.metrics);
    }
  }
  int bad = 0;
  std::string first_bad;
  for (const auto& [name, lines] : checks.logs) {
    std::string where;
    if (!max_fitness_monotone(lines, &where)) {
      if (bad++ == 0) first_bad = name + " " + where;
    }
  }
  report(5, "archive max fitness never decreases", bad == 0,
         bad == 0 ? fmt("%zu metrics logs scanned", checks.logs.size())
                  : fmt("%d of %zu logs decrease, first: %s", bad, checks.logs.size(),
                        first_bad.c_str()));

  const bool trend = cov[0] >= cov[1] && qd[0] >= qd[1] && mx[0] >= 0.95 * mx[1];
  report(6, "desk-scale trend", trend,
         fmt("PDO coverage %.1f qd %.1f max %.2f | PBT coverage %.1f qd %.1f max %.2f | %.0fs",
             cov[0], qd[0], mx[0], cov[1], qd[1], mx[1], secs6));
}

// ---------------------------------------------------------------------------

constexpr double kDeg = std::numbers::pi / 180.0;

// Lock predicate from first principles: nose vector from heading and pitch,
// angle to the line of sight via acos of the normalised dot product.
bool independent_lock(const env::AircraftState& a, const env::AircraftState& b,
                      double half_angle_deg, double range) {
  const Eigen::Vector3d nose(std::cos(a.pitch) * std::cos(a.heading),
                             std::cos(a.pitch) * std::sin(a.heading), std::sin(a.pitch));
  const Eigen::Vector3d los = b.position - a.position;
  const double dist = los.norm();
  if (!(dist < range) || dist == 0.0) return false;
  const double cosine = std::clamp(nose.dot(los) / dist, -1.0, 1.0);
  return std::acos(cosine) <= half_angle_deg * kDeg + 1e-12;
}

bool near_cone_edge(const env::AircraftState& a, const env::AircraftState& b, double half_angle_deg) {
  const Eigen::Vector3d nose(std::cos(a.pitch) * std::cos(a.heading),
                             std::cos(a.pitch) * std::sin(a.heading), std::sin(a.pitch));
  const Eigen::Vector3d los = b.position - a.position;
  const double angle = std::acos(std::clamp(nose.dot(los) / los.norm(), -1.0, 1.0));
  return std::abs(angle - half_angle_deg * kDeg) < 1e-9;
}

bool outside(const env::AircraftState& s, const env::DogfightConfig& c) {
  return std::abs(s.position.x()) > c.half_width || std::abs(s.position.y()) > c.half_width ||
         s.position.z() < c.min_altitude || s.position.z() > c.max_altitude;
}

struct Episode {
  std::string csv;
  std::vector<double> rewards;
  env::EpisodeStatus status;
};

Episode random_episode(std::uint64_t seed, env::DogfightEnv& fight) {
  fight.set_recording(true);
  fight.reset(seed);
  std::mt19937_64 actions(seed * 7919 + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Episode out;
  env::StepResult r;
  while (!r.done && out.rewards.size() < 4000) {
    r = fight.step(std::vector<double>{u(actions), u(actions), u(actions), u(actions)});
    out.rewards.push_back(r.reward);
  }
  std::ostringstream csv;
  env::write_trajectory_csv(csv, fight.trajectory());
  out.csv = csv.str();
  out.status = fight.status();
  return out;
}

void dogfight_contract() {
  const env::DogfightConfig config;
  int length_bad = 0, terminal_bad = 0, oob_bad = 0, lock_bad = 0, replay_bad = 0;
  long lock_events = 0, oob_episodes = 0;
  int max_len = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    env::DogfightEnv fight(config);
    const Episode ep = random_episode(seed, fight);
    const auto& rows = fight.trajectory();
    max_len = std::max(max_len, ep.status.step);
    length_bad += ep.status.step <= config.max_steps && rows.size() == std::size_t(ep.status.step) ? 0 : 1;
    terminal_bad += ep.status.terminal ? 0 : 1;

    bool oob_ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      const bool red_out = outside(row.red, config);
      const bool blue_out = outside(row.blue, config);
      const double expected_sparse = (independent_lock(row.red, row.blue, 10.0, 1000.0) ? 1.0 : 0.0) -
                                     (independent_lock(row.blue, row.red, 10.0, 1000.0) ? 1.0 : 0.0) +
                                     (red_out ? -1000.0 : 0.0);
      if (red_out != (ep.status.terminal && i + 1 == rows.size() &&
                      ep.status.terminal->kind == env::Terminal::Kind::kOutOfBounds &&
                      ep.status.terminal->who == env::Side::kRed)) {
        oob_ok = false;
      }
      if ((red_out || blue_out) && i + 1 != rows.size()) oob_ok = false;
      if (red_out) ++oob_episodes;
      const bool edge = near_cone_edge(row.red, row.blue, 10.0) || near_cone_edge(row.blue, row.red, 10.0);
      if (!edge) {
        if (row.red_locks != independent_lock(row.red, row.blue, 10.0, 1000.0) ||
            row.blue_locks != independent_lock(row.blue, row.red, 10.0, 1000.0) ||
            row.sparse_reward != expected_sparse) {
          ++lock_bad;
        }
      }
      lock_events += row.red_locks + row.blue_locks;
    }
    oob_bad += oob_ok ? 0 : 1;

    env::DogfightEnv again(config);
    const Episode replay = random_episode(seed, again);
    replay_bad += replay.csv == ep.csv && replay.rewards == ep.rewards ? 0 : 1;
  }
  const bool ok = length_bad == 0 && terminal_bad == 0 && oob_bad == 0 && lock_bad == 0 && replay_bad == 0;
  report(7, "dogfight environment contract", ok,
         fmt("100 episodes, max length %d, %ld red out-of-bounds endings, %ld lock events; "
             "failures: length %d terminal %d oob %d lock %d replay %d",
             max_len, oob_episodes, lock_events, length_bad, terminal_bad, oob_bad, lock_bad,
             replay_bad));
}

// ---------------------------------------------------------------------------

// Minimum-cost perfect matching (Hungarian algorithm with potentials).
double assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

Eigen::MatrixXd draw(const Eigen::VectorXd& mean, const Eigen::VectorXd& sd, int n,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(n, mean.size());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < mean.size(); ++k) x(i, k) = mean(k) + sd(k) * g(rng);
  return x;
}

double empirical_w2_squared(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = (x.row(i) - y.row(j)).squaredNorm();
  return assignment_cost(cost) / n;
}

void kernel_closed_forms() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> mean_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> sd_dist(0.3, 1.5);
  const int n = 1200;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int dim = 2;
    Eigen::VectorXd m1(dim), m2(dim), s1(dim), s2(dim);
    for (int k = 0; k < dim; ++k) {
      m1(k) = mean_dist(rng);
      m2(k) = mean_dist(rng);
      s1(k) = sd_dist(rng);
      s2(k) = sd_dist(rng);
    }
    const double exact = kernels::w2_squared_full(m1, Eigen::MatrixXd(s1.array().square().matrix().asDiagonal()),
                                                  m2, Eigen::MatrixXd(s2.array().square().matrix().asDiagonal()));
    // Squared mean shift plus the optimal assignment cost between centred
    // samples rescaled to the exact covariances.
    auto matched = [&](const Eigen::VectorXd& sd) {
      Eigen::MatrixXd z = draw(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim), n, rng);
      z.rowwise() -= z.colwise().mean();
      const Eigen::MatrixXd cov = z.transpose() * z / n;
      const Eigen::MatrixXd whiten = kernels::psd_sqrt(cov).inverse();
      return Eigen::MatrixXd(z * whiten * sd.asDiagonal());
    };
    const double estimate =
        (m1 - m2).squaredNorm() + empirical_w2_squared(matched(s1), matched(s2));
    worst = std::max(worst, std::abs(estimate - exact) / exact);
  }

  std::uniform_real_distribution<double> u(0.0, 1.0);
  int out_of_range = 0;
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + t % 7;
    std::vector<double> p(k), q(k);
    for (int i = 0; i < k; ++i) {
      p[i] = u(rng) < 0.2 ? 0.0 : u(rng);
      q[i] = u(rng) < 0.2 ? 0.0 : u(rng);
    }
    p[t % k] += 1e-3;
    q[(t + 1) % k] += 1e-3;
    double sp = 0.0, sq = 0.0;
    for (int i = 0; i < k; ++i) sp += p[i], sq += q[i];
    for (int i = 0; i < k; ++i) p[i] /= sp, q[i] /= sq;
    const double d = kernels::jsd(DiscreteDist{p}, DiscreteDist{q});
    out_of_range += d >= 0.0 && d <= std::numbers::ln2 ? 0 : 1;
  }
  report(8, "kernel closed forms", worst <= 0.05 && out_of_range == 0,
         fmt("W2 worst relative error vs Monte-Carlo OT %.2f%% over 10 pairs; "
             "JSD out of [0, ln2] %d/1000",
             100.0 * worst, out_of_range));
}

// ---------------------------------------------------------------------------

void bandit_sanity() {
  double share[2] = {0.0, 0.0};
  for (int rule = 0; rule < 2; ++rule) {
    for (int run = 0; run < 10; ++run) {
      std::mt19937_64 rng(900 + run);
      std::bernoulli_distribution good(0.9), bad(0.1);
      auto bandit = train::BanditState::create({0.0, 0.5});
      long good_pulls = 0;
      for (int t = 0; t < 1000; ++t) {
        const int arm = rule == 0 ? train::thompson_select(bandit, rng) : train::ucb_select(bandit);
        good_pulls += arm == 0;
        train::bandit_update(bandit, arm == 0 ? good(rng) : bad(rng));
      }
      share[rule] += good_pulls / 1000.0 / 10.0;
    }
  }
  report(9, "bandit sanity", share[0] >= 0.95 && share[1] >= 0.95,
         fmt("share of pulls on the 0.9 arm: Thompson %.3f, UCB %.3f", share[0], share[1]));
}

}  // namespace

// Optional arguments select groups by name: math bound repulsion training
// dogfight kernels bandit.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, void (*)()>> groups = {
      {"math", math_oracles},         {"bound", surrogate_lower_bound},
      {"repulsion", repulsion},       {"training", training_criteria},
      {"dogfight", dogfight_contract}, {"kernels", kernel_closed_forms},
      {"bandit", bandit_sanity}};
  const std::vector<std::string> selected(argv + 1, argv + argc);
  for (const auto& [name, fn] : groups) {
    if (selected.empty() || std::find(selected.begin(), selected.end(), name) != selected.end()) fn();
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
