#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pdo/train/bandit.hpp"

using namespace pdo::train;

TEST_SUITE("bandit") {
  TEST_CASE("thompson sampling favours the arm with more successes") {
    auto bandit = BanditState::create({0.0, 0.5});
    bandit.successes = {100, 0};
    bandit.failures = {0, 100};
    std::mt19937_64 rng(1);
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += thompson_select(bandit, rng) == 0;
    CHECK(first / 10000.0 > 0.99);
  }

  TEST_CASE("thompson sampling without data is uniform") {
    auto bandit = BanditState::create({0.0, 0.5});
    std::mt19937_64 rng(2);
    int first = 0;
    for (int i = 0; i < 20000; ++i) first += thompson_select(bandit, rng) == 0;
    CHECK(std::abs(first / 20000.0 - 0.5) < 0.02);
  }

  TEST_CASE("ucb tries unpulled arms first") {
    auto bandit = BanditState::create({0.0, 0.5, 1.0});
    bandit.successes = {5, 0, 0};
    bandit.failures = {0, 0, 3};
    CHECK(ucb_select(bandit) == 1);
    CHECK(bandit.last_arm == 1);
  }

  TEST_CASE("ucb picks the largest optimistic score") {
    auto bandit = BanditState::create({0.0, 0.5});
    bandit.successes = {3, 1};
    bandit.failures = {7, 1};
    // N = 12: arm 0 scores 0.3 + sqrt(2 ln 12 / 10), arm 1 scores 0.5 + sqrt(2 ln 12 / 2).
    const double s0 = 0.3 + std::sqrt(2.0 * std::log(12.0) / 10.0);
    const double s1 = 0.5 + std::sqrt(2.0 * std::log(12.0) / 2.0);
    CHECK(ucb_select(bandit) == (s1 > s0 ? 1 : 0));
    bandit.successes = {90, 1};
    bandit.failures = {10, 30};
    CHECK(ucb_select(bandit) == 0);
  }

  TEST_CASE("update credits the last arm") {
    auto bandit = BanditState::create({0.0, 0.5});
    CHECK_THROWS_AS(bandit_update(bandit, true), std::logic_error);
    bandit.last_arm = 1;
    bandit_update(bandit, false);
    CHECK(bandit.failures == std::vector<long>{0, 1});
    CHECK(bandit.successes == std::vector<long>{0, 0});
    bandit_update(bandit, true);
    CHECK(bandit.successes == std::vector<long>{0, 1});
    CHECK(bandit.total_pulls() == 2);
  }

  TEST_CASE("best fitness observation is strict") {
    auto bandit = BanditState::create({0.0});
    CHECK(observe_best(bandit, -5.0));
    CHECK_FALSE(observe_best(bandit, -5.0));
    CHECK_FALSE(observe_best(bandit, -6.0));
    CHECK(observe_best(bandit, 1.0));
    CHECK(bandit.best_fitness_so_far == 1.0);
  }

  TEST_CASE("both rules concentrate on a good arm") {
    for (int rule = 0; rule < 2; ++rule) {
      std::mt19937_64 rng(3 + rule);
      std::bernoulli_distribution good(0.9), bad(0.1);
      auto bandit = BanditState::create({0.0, 0.5});
      long good_pulls = 0;
      for (int t = 0; t < 1000; ++t) {
        const int arm = rule == 0 ? thompson_select(bandit, rng) : ucb_select(bandit);
        good_pulls += arm == 0;
        bandit_update(bandit, arm == 0 ? good(rng) : bad(rng));
      }
      CHECK(good_pulls > 900);
    }
  }

  TEST_CASE("empty arm set is rejected") {
    CHECK_THROWS_AS(BanditState::create({}), std::invalid_argument);
  }
}
