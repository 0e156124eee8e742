#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pdo/train/clustering.hpp"

using namespace pdo;
using namespace pdo::train;

namespace {

archive::AgentSnapshot constant_agent(double ax, double ay, double fitness, std::uint64_t seq) {
  Rng rng(1);
  rl::AgentOptions options;
  options.hidden = {4};
  archive::AgentSnapshot s{rl::Agent::create(3, policy::ActionSpace::continuous(2), options, rng),
                           fitness};
  auto params = s.agent.policy.mutable_params();
  std::fill(params.begin(), params.end(), 0.0);
  const std::size_t n = s.agent.policy.net_param_count();
  params[n - 2] = ax;
  params[n - 1] = ay;
  s.sequence = seq;
  return s;
}

std::vector<std::vector<double>> two_blobs(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 20; ++i) {
    const double cx = i < 10 ? -3.0 : 3.0;
    points.push_back({cx + g(rng), g(rng)});
  }
  return points;
}

}  // namespace

TEST_SUITE("clustering") {
  TEST_CASE("k-means separates two blobs") {
    std::mt19937_64 rng(1);
    const auto points = two_blobs(rng);
    const auto r = kmeans(points, 2, 5, rng);
    CHECK_FALSE(r.degenerate);
    for (int i = 1; i < 10; ++i) CHECK(r.assignment[i] == r.assignment[0]);
    for (int i = 11; i < 20; ++i) CHECK(r.assignment[i] == r.assignment[10]);
    CHECK(r.assignment[0] != r.assignment[10]);
    double inertia = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto& c = r.centroids[r.assignment[i]];
      inertia += (points[i][0] - c[0]) * (points[i][0] - c[0]) +
                 (points[i][1] - c[1]) * (points[i][1] - c[1]);
    }
    CHECK(r.inertia == doctest::Approx(inertia));
  }

  TEST_CASE("k-means is reproducible from the seed") {
    std::mt19937_64 data(2);
    const auto points = two_blobs(data);
    std::mt19937_64 a(7), b(7);
    const auto ra = kmeans(points, 3, 4, a);
    const auto rb = kmeans(points, 3, 4, b);
    CHECK(ra.assignment == rb.assignment);
    CHECK(ra.centroids == rb.centroids);
  }

  TEST_CASE("k-means input validation") {
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(kmeans({{1.0}}, 2, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(kmeans({{1.0}, {1.0, 2.0}}, 1, 1, rng), std::invalid_argument);
  }

  TEST_CASE("representatives are the fittest member of each cluster") {
    std::mt19937_64 rng(4);
    const auto points = two_blobs(rng);
    std::vector<double> fitness(20, 0.0);
    fitness[3] = 5.0;
    fitness[17] = 2.0;
    const auto reps = select_cluster_representatives(points, fitness, 2, 5, rng);
    REQUIRE(reps);
    CHECK(std::set<std::size_t>(reps->begin(), reps->end()) == std::set<std::size_t>{3, 17});
  }

  TEST_CASE("identical embeddings fall back to top m") {
    std::vector<archive::AgentSnapshot> candidates;
    for (int i = 0; i < 4; ++i) candidates.push_back(constant_agent(0.2, 0.2, i % 2, i));
    const std::vector<Observation> probe{{0.0, 0.0, 0.0}, {0.5, -0.5, 0.1}};
    std::mt19937_64 rng(5);
    const auto sel = clustering_selection(candidates, 3, probe, rng);
    CHECK(sel.fell_back);
    REQUIRE(sel.selected.size() == 3);
    CHECK(sel.selected[0].sequence == 1);
    CHECK(sel.selected[1].sequence == 3);
    CHECK(sel.selected[2].sequence == 0);
  }

  TEST_CASE("distinct behaviours yield one pick per group") {
    std::vector<archive::AgentSnapshot> candidates{
        constant_agent(1.0, 1.0, 3.0, 0), constant_agent(0.9, 1.0, 4.0, 1),
        constant_agent(-1.0, -1.0, 1.0, 2), constant_agent(-1.0, -0.9, 0.5, 3)};
    const std::vector<Observation> probe{{0.0, 0.0, 0.0}};
    std::mt19937_64 rng(6);
    const auto sel = clustering_selection(candidates, 2, probe, rng);
    CHECK_FALSE(sel.fell_back);
    std::set<std::uint64_t> seqs;
    for (const auto& s : sel.selected) seqs.insert(s.sequence);
    CHECK(seqs == std::set<std::uint64_t>{1, 2});
  }

  TEST_CASE("behaviour embedding concatenates mean actions") {
    const auto s = constant_agent(0.25, -0.5, 0.0, 0);
    const std::vector<Observation> probe{{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}};
    CHECK(behavior_embedding(s.agent, probe) == std::vector<double>{0.25, -0.5, 0.25, -0.5});
  }
}
