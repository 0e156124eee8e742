#pragma once

#include <optional>
#include <random>
#include <vector>

#include "pdo/archive/archive.hpp"

namespace pdo::train {

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  bool degenerate = false;  // some cluster ended up empty
};

// Lloyd's algorithm with k-means++ seeding; best of `restarts` by inertia.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int restarts,
                    std::mt19937_64& rng, int max_iterations = 100);

// Indices of the highest-fitness point per cluster (ties to the lower index),
// ordered by cluster. nullopt if clustering stayed degenerate after
// `max_attempts` reseeded attempts.
std::optional<std::vector<std::size_t>> select_cluster_representatives(
    const std::vector<std::vector<double>>& embeddings, const std::vector<double>& fitness, int k,
    int restarts, std::mt19937_64& rng, int max_attempts = 5);

// Concatenated deterministic actions on the probe states, each state
// normalised with the agent's own statistics.
std::vector<double> behavior_embedding(const rl::Agent& agent,
                                       const std::vector<Observation>& probe_raw);

struct ClusteringSelection {
  std::vector<archive::AgentSnapshot> selected;
  bool fell_back = false;  // degenerate clustering; top-M by fitness used instead
};

ClusteringSelection clustering_selection(const std::vector<archive::AgentSnapshot>& candidates,
                                         int m, const std::vector<Observation>& probe_raw,
                                         std::mt19937_64& rng, int restarts = 10);

// Highest fitness first, ties to the older snapshot.
std::vector<archive::AgentSnapshot> top_m_of(std::vector<archive::AgentSnapshot> candidates,
                                             int m);

}  // namespace pdo::train
