#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pdo/env/toy.hpp"
#include "pdo/kernels/dse.hpp"

using namespace pdo;
using namespace pdo::env;

namespace {

double run_episode(ToyEnv& env, const std::function<std::vector<double>(const Observation&)>& act) {
  Observation obs = env.reset(0);
  double total = 0.0;
  for (;;) {
    const auto r = env.step(act(obs));
    total += r.sparse_reward;
    if (r.done) return total;
    obs = r.obs;
  }
}

policy::Policy constant_policy(double ax, double ay) {
  return policy::Policy(policy::Topology{{3, 1, 2}}, policy::ActionSpace::continuous(2),
                        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, ax, ay, 0.0, 0.0});
}

}  // namespace

TEST_SUITE("toy") {
  TEST_CASE("zero action stays at the spawn") {
    ToyEnv env;
    const auto obs = env.reset(123);
    CHECK(obs == Observation{0.0, 0.0, 0.0});
    const auto r = env.step(std::vector<double>{0.0, 0.0});
    CHECK(env.position() == std::array<double, 2>{0.0, 0.0});
    CHECK(r.obs == Observation{0.0, 0.0, 0.01});
    CHECK(r.reward == doctest::Approx(std::exp(-0.5 / 0.02)));
    CHECK_FALSE(r.done);
  }

  TEST_CASE("constant action walks a straight line") {
    ToyEnv env;
    env.reset(0);
    for (int t = 1; t <= 10; ++t) {
      env.step(std::vector<double>{1.0, 0.5});
      CHECK(env.position()[0] == doctest::Approx(0.05 * t));
      CHECK(env.position()[1] == doctest::Approx(0.025 * t));
    }
    CHECK(env.trace().size() == 10);
    CHECK(env.step_index() == 10);
  }

  TEST_CASE("walls clamp the position and actions are clipped") {
    ToyEnv env;
    env.reset(0);
    StepResult r;
    for (int t = 0; t < 100; ++t) r = env.step(std::vector<double>{5.0, -3.0});
    CHECK(r.done);
    CHECK(env.position() == std::array<double, 2>{1.0, -1.0});
    CHECK(env.behavior_descriptor() == std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(env.step(std::vector<double>{0.0, 0.0}), std::logic_error);
    env.reset(0);
    CHECK_THROWS_AS(env.step(std::vector<double>{0.0}), std::invalid_argument);
  }

  TEST_CASE("reward peaks at the goals") {
    ToyEnv env;
    CHECK(env.reward_at({0.5, 0.5}) == doctest::Approx(1.0));
    CHECK(env.reward_at({-0.5, -0.5}) == doctest::Approx(0.7));
    CHECK(env.reward_at({0.6, 0.5}) == doctest::Approx(std::exp(-0.01 / 0.02)));
    CHECK_THROWS_AS(ToyEnv(ToyConfig{{{{0.0, 0.0}, 1.0}}}), std::invalid_argument);
  }

  TEST_CASE("greedy goal seeking beats random actions") {
    ToyEnv env;
    auto greedy = [](const Observation& o) {
      return std::vector<double>{std::clamp((0.5 - o[0]) / 0.05, -1.0, 1.0),
                                 std::clamp((0.5 - o[1]) / 0.05, -1.0, 1.0)};
    };
    const double greedy_return = run_episode(env, greedy);
    CHECK(greedy_return > 85.0);
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double random_return =
          run_episode(env, [&](const Observation&) { return std::vector<double>{u(rng), u(rng)}; });
      CHECK(greedy_return >= random_return);
    }
  }

  TEST_CASE("policies heading to different goals are dissimilar") {
    const auto to_major = constant_policy(1.0, 1.0);
    const auto to_minor = constant_policy(-1.0, -1.0);
    kernels::StateBatch batch;
    ToyEnv env;
    Observation obs = env.reset(0);
    for (int t = 0; t < 20; ++t) {
      batch.states.push_back(obs);
      obs = env.step(std::vector<double>{1.0, 1.0}).obs;
    }
    CHECK(kernels::dse_kernel_entry(to_major, to_minor, batch, kernels::Metric::kW2, false) < 0.5);
    CHECK(kernels::dse_kernel_entry(to_major, to_major, batch, kernels::Metric::kW2, false) == 1.0);
  }

  TEST_CASE("trace csv") {
    ToyEnv env;
    env.reset(0);
    env.step(std::vector<double>{1.0, 0.0});
    env.step(std::vector<double>{0.0, -1.0});
    std::ostringstream out;
    write_trace_csv(out, env.trace());
    CHECK(out.str() == "step,x,y\n1,0.050000000000000003,0\n2,0.050000000000000003,-0.050000000000000003\n");
  }

  TEST_CASE("config json round trip") {
    ToyConfig c;
    c.horizon = 40;
    c.goals[1].reward = 0.3;
    const auto back = toy_config_from_json(to_json(c));
    CHECK(back.horizon == 40);
    CHECK(back.goals[1].reward == 0.3);
    CHECK(to_json(back) == to_json(c));
  }
}
