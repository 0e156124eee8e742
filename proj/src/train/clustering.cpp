#include "pdo/train/clustering.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "pdo/simd/kernels.hpp"

namespace pdo::train {

namespace {

KMeansResult kmeans_once(const std::vector<std::vector<double>>& points, int k,
                         std::mt19937_64& rng, int max_iterations) {
  const std::size_t n = points.size();
  KMeansResult r;
  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  r.centroids.push_back(points[first(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(r.centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centroids) best = std::min(best, simd::squared_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      r.centroids.push_back(points[first(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= d2[i];
      if (target < 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    r.centroids.push_back(points[pick]);
  }

  r.assignment.assign(n, -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = simd::squared_distance(points[i], r.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.assignment[i] != best) {
        r.assignment[i] = best;
        changed = true;
      }
    }
    std::vector<int> counts(k, 0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(points[0].size(), 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[r.assignment[i]];
      simd::axpy(1.0, points[i], sums[r.assignment[i]]);
    }
    r.degenerate = false;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        r.degenerate = true;
        continue;
      }
      for (double& v : sums[c]) v /= counts[c];
      r.centroids[c] = std::move(sums[c]);
    }
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r.inertia += simd::squared_distance(points[i], r.centroids[r.assignment[i]]);
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int restarts,
                    std::mt19937_64& rng, int max_iterations) {
  if (k < 1 || points.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("kmeans: need at least k points");
  }
  for (const auto& p : points) {
    if (p.size() != points[0].size()) throw std::invalid_argument("kmeans: ragged points");
  }
  std::optional<KMeansResult> best;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansResult cand = kmeans_once(points, k, rng, max_iterations);
    const bool better = !best || (best->degenerate && !cand.degenerate) ||
                        (best->degenerate == cand.degenerate && cand.inertia < best->inertia);
    if (better) best = std::move(cand);
  }
  return *best;
}

std::optional<std::vector<std::size_t>> select_cluster_representatives(
    const std::vector<std::vector<double>>& embeddings, const std::vector<double>& fitness, int k,
    int restarts, std::mt19937_64& rng, int max_attempts) {
  if (embeddings.size() != fitness.size()) {
    throw std::invalid_argument("select_cluster_representatives: size mismatch");
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const KMeansResult r = kmeans(embeddings, k, restarts, rng);
    if (r.degenerate) continue;
    std::vector<std::size_t> reps(k, embeddings.size());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      auto& rep = reps[r.assignment[i]];
      if (rep == embeddings.size() || fitness[i] > fitness[rep]) rep = i;
    }
    return reps;
  }
  return std::nullopt;
}

std::vector<double> behavior_embedding(const rl::Agent& agent,
                                       const std::vector<Observation>& probe_raw) {
  std::vector<double> out;
  policy::Mlp::Cache cache;
  for (const auto& s : probe_raw) {
    const Observation x = agent.normalize(s);
    if (agent.policy.action_space().is_continuous()) {
      const auto a = agent.policy.mean_action(x, cache);
      out.insert(out.end(), a.begin(), a.end());
    } else {
      const auto& p = std::get<DiscreteDist>(agent.policy.forward(x, cache)).probs;
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return out;
}

std::vector<archive::AgentSnapshot> top_m_of(std::vector<archive::AgentSnapshot> candidates,
                                             int m) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].fitness != candidates[b].fitness) {
      return candidates[a].fitness > candidates[b].fitness;
    }
    return candidates[a].sequence < candidates[b].sequence;
  });
  std::vector<archive::AgentSnapshot> out;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(out.size()) < m; ++i) {
    out.push_back(std::move(candidates[order[i]]));
  }
  return out;
}

ClusteringSelection clustering_selection(const std::vector<archive::AgentSnapshot>& candidates,
                                         int m, const std::vector<Observation>& probe_raw,
                                         std::mt19937_64& rng, int restarts) {
  if (m < 1 || candidates.size() < static_cast<std::size_t>(m)) {
    throw std::invalid_argument("clustering_selection: need at least M candidates");
  }
  if (probe_raw.empty()) throw std::invalid_argument("clustering_selection: empty probe batch");
  std::vector<std::vector<double>> embeddings;
  std::vector<double> fitness;
  for (const auto& c : candidates) {
    embeddings.push_back(behavior_embedding(c.agent, probe_raw));
    fitness.push_back(c.fitness);
  }
  ClusteringSelection out;
  if (auto reps = select_cluster_representatives(embeddings, fitness, m, restarts, rng)) {
    for (std::size_t i : *reps) out.selected.push_back(candidates[i]);
  } else {
    out.selected = top_m_of(candidates, m);
    out.fell_back = true;
  }
  return out;
}

}  // namespace pdo::train
