#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pdo/rl/agent.hpp"

namespace pdo::archive {

enum class Origin { kRewardPhase, kAuxiliaryPhase };

std::string to_string(Origin origin);
Origin origin_from_string(const std::string& name);

// An evaluated agent together with the full payload needed to resume
// training from it.
struct AgentSnapshot {
  rl::Agent agent;
  double fitness = 0.0;
  std::vector<double> bd;  // empty when the archive does not use descriptors
  Origin origin = Origin::kRewardPhase;
  int iteration = 0;
  int learner_id = -1;
  // Assigned by the archive on insertion; orders snapshots by age.
  std::uint64_t sequence = 0;

  bool operator==(const AgentSnapshot&) const = default;
};

// Equality of everything the offer carries (the archive sequence excluded).
bool same_payload(const AgentSnapshot& a, const AgentSnapshot& b);

void write_snapshot(std::ostream& out, const AgentSnapshot& snapshot);
AgentSnapshot read_snapshot(std::istream& in);
// Manifest entry: everything except the agent payload.
nlohmann::json summary_json(const AgentSnapshot& snapshot);

enum class AddResult { kInserted, kReplaced, kRejected };
std::string to_string(AddResult result);

struct QdMetrics {
  double max_fitness = 0.0;  // NaN when empty
  double min_fitness = 0.0;  // NaN when empty
  double qd_score = 0.0;
  int coverage = 0;
};

struct TopM {
  std::vector<AgentSnapshot> agents;
  bool padded = false;  // fewer than M distinct entries; best repeated
};

// MAP-Elites grid over [0,1]^2 descriptors.
class MapElitesGrid {
 public:
  explicit MapElitesGrid(int shape = 10);

  int shape() const { return shape_; }
  // floor(bd * shape) clamped to [0, shape - 1] per dimension.
  std::pair<int, int> cell_index(std::span<const double> bd) const;
  AddResult add(AgentSnapshot snapshot);
  const std::optional<AgentSnapshot>& cell(int i, int j) const;
  std::vector<const AgentSnapshot*> occupied() const;

 private:
  int shape_;
  std::vector<std::optional<AgentSnapshot>> cells_;
};

// Keeps the `capacity` fittest offers; evicts the minimum (older first on
// ties) and accepts only offers strictly above the current minimum once full.
class FitnessQueue {
 public:
  explicit FitnessQueue(int capacity = 10);

  int capacity() const { return capacity_; }
  AddResult add(AgentSnapshot snapshot);
  const std::vector<AgentSnapshot>& entries() const { return entries_; }
  std::vector<const AgentSnapshot*> occupied() const;

 private:
  int capacity_;
  std::vector<AgentSnapshot> entries_;
};

enum class ArchiveKind { kGrid, kQueue };
std::string to_string(ArchiveKind kind);
ArchiveKind archive_kind_from_string(const std::string& name);

// Thread-safe archive. Every operation is serialised; reads return copies.
class Archive {
 public:
  Archive(ArchiveKind kind, double qd_offset, int grid_shape = 10, int queue_capacity = 10);
  Archive(const Archive& other);
  Archive& operator=(const Archive&) = delete;

  ArchiveKind kind() const { return kind_; }
  double qd_offset() const { return qd_offset_; }

  AddResult add(AgentSnapshot snapshot);
  AgentSnapshot sample_uniform(std::mt19937_64& rng) const;
  // Highest fitness first; ties broken by older snapshot first.
  TopM top_m(int m) const;
  QdMetrics qd_metrics() const;
  std::vector<AgentSnapshot> entries() const;
  std::size_t size() const;

  // Grid: shape x shape fitness values (nullopt for empty cells). Queue: one
  // row holding the entries in descending fitness.
  std::vector<std::vector<std::optional<double>>> heatmap() const;

  // Writes blobs, manifest.json and heatmap.csv into `dir` (created if needed).
  void save(const std::filesystem::path& dir) const;
  static Archive load(const std::filesystem::path& dir);

 private:
  std::vector<AgentSnapshot> entries_locked() const;

  ArchiveKind kind_;
  double qd_offset_;
  mutable std::mutex mutex_;
  std::variant<MapElitesGrid, FitnessQueue> store_;
  std::uint64_t next_sequence_ = 1;
};

void write_heatmap_csv(std::ostream& out,
                       const std::vector<std::vector<std::optional<double>>>& heatmap);

}  // namespace pdo::archive
