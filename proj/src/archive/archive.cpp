#include "pdo/archive/archive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pdo/io/binary.hpp"

namespace pdo::archive {

namespace {

constexpr std::uint32_t kSnapshotMagic = 0x31504e53;  // "SNP1"

bool better(const AgentSnapshot* a, const AgentSnapshot* b) {
  if (a->fitness != b->fitness) return a->fitness > b->fitness;
  return a->sequence < b->sequence;
}

std::string blob_name(const AgentSnapshot& s) {
  return "snapshot_" + std::to_string(s.sequence) + ".bin";
}

}  // namespace

std::string to_string(Origin origin) {
  return origin == Origin::kRewardPhase ? "reward_phase" : "auxiliary_phase";
}

Origin origin_from_string(const std::string& name) {
  if (name == "reward_phase") return Origin::kRewardPhase;
  if (name == "auxiliary_phase") return Origin::kAuxiliaryPhase;
  throw std::invalid_argument("unknown snapshot origin: " + name);
}

std::string to_string(AddResult result) {
  switch (result) {
    case AddResult::kInserted:
      return "inserted";
    case AddResult::kReplaced:
      return "replaced";
    case AddResult::kRejected:
      return "rejected";
  }
  return "unknown";
}

std::string to_string(ArchiveKind kind) { return kind == ArchiveKind::kGrid ? "grid" : "queue"; }

ArchiveKind archive_kind_from_string(const std::string& name) {
  if (name == "grid") return ArchiveKind::kGrid;
  if (name == "queue") return ArchiveKind::kQueue;
  throw std::invalid_argument("unknown archive kind: " + name);
}

bool same_payload(const AgentSnapshot& a, const AgentSnapshot& b) {
  return a.fitness == b.fitness && a.bd == b.bd && a.agent == b.agent;
}

void write_snapshot(std::ostream& out, const AgentSnapshot& s) {
  io::BinaryWriter w(out);
  w.u32(kSnapshotMagic);
  w.f64(s.fitness);
  w.f64s(s.bd);
  w.u32(s.origin == Origin::kRewardPhase ? 0 : 1);
  w.i64(s.iteration);
  w.i64(s.learner_id);
  w.u64(s.sequence);
  rl::write_agent(out, s.agent);
}

AgentSnapshot read_snapshot(std::istream& in) {
  io::BinaryReader r(in);
  if (r.u32() != kSnapshotMagic) throw std::runtime_error("snapshot: bad header");
  const double fitness = r.f64();
  auto bd = r.f64s();
  const auto origin = r.u32();
  if (origin > 1) throw std::runtime_error("snapshot: bad origin tag");
  const auto iteration = r.i64();
  const auto learner = r.i64();
  const auto sequence = r.u64();
  return AgentSnapshot{rl::read_agent(in),
                       fitness,
                       std::move(bd),
                       origin == 0 ? Origin::kRewardPhase : Origin::kAuxiliaryPhase,
                       static_cast<int>(iteration),
                       static_cast<int>(learner),
                       sequence};
}

nlohmann::json summary_json(const AgentSnapshot& s) {
  return {{"fitness", s.fitness},      {"bd", s.bd},
          {"origin", to_string(s.origin)}, {"iteration", s.iteration},
          {"learner_id", s.learner_id}, {"sequence", s.sequence}};
}

MapElitesGrid::MapElitesGrid(int shape) : shape_(shape), cells_(shape * shape) {
  if (shape < 1) throw std::invalid_argument("MapElitesGrid: shape must be positive");
}

std::pair<int, int> MapElitesGrid::cell_index(std::span<const double> bd) const {
  if (bd.size() != 2) throw std::invalid_argument("MapElitesGrid: behaviour descriptor required");
  auto index = [this](double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("MapElitesGrid: non-finite descriptor");
    const double scaled = std::floor(v * shape_);
    return static_cast<int>(std::clamp(scaled, 0.0, static_cast<double>(shape_ - 1)));
  };
  return {index(bd[0]), index(bd[1])};
}

AddResult MapElitesGrid::add(AgentSnapshot snapshot) {
  const auto [i, j] = cell_index(snapshot.bd);
  auto& slot = cells_[i * shape_ + j];
  if (!slot) {
    slot = std::move(snapshot);
    return AddResult::kInserted;
  }
  if (snapshot.fitness > slot->fitness) {
    slot = std::move(snapshot);
    return AddResult::kReplaced;
  }
  return AddResult::kRejected;
}

const std::optional<AgentSnapshot>& MapElitesGrid::cell(int i, int j) const {
  if (i < 0 || j < 0 || i >= shape_ || j >= shape_) {
    throw std::out_of_range("MapElitesGrid::cell: index out of range");
  }
  return cells_[i * shape_ + j];
}

std::vector<const AgentSnapshot*> MapElitesGrid::occupied() const {
  std::vector<const AgentSnapshot*> out;
  for (const auto& c : cells_) {
    if (c) out.push_back(&*c);
  }
  return out;
}

FitnessQueue::FitnessQueue(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("FitnessQueue: capacity must be positive");
}

AddResult FitnessQueue::add(AgentSnapshot snapshot) {
  for (const auto& e : entries_) {
    if (same_payload(e, snapshot)) return AddResult::kRejected;
  }
  if (static_cast<int>(entries_.size()) < capacity_) {
    entries_.push_back(std::move(snapshot));
    return AddResult::kInserted;
  }
  auto worst = entries_.begin();
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->fitness < worst->fitness ||
        (it->fitness == worst->fitness && it->sequence < worst->sequence)) {
      worst = it;
    }
  }
  if (snapshot.fitness > worst->fitness) {
    *worst = std::move(snapshot);
    return AddResult::kReplaced;
  }
  return AddResult::kRejected;
}

std::vector<const AgentSnapshot*> FitnessQueue::occupied() const {
  std::vector<const AgentSnapshot*> out;
  for (const auto& e : entries_) out.push_back(&e);
  return out;
}

Archive::Archive(ArchiveKind kind, double qd_offset, int grid_shape, int queue_capacity)
    : kind_(kind),
      qd_offset_(qd_offset),
      store_(kind == ArchiveKind::kGrid
                 ? std::variant<MapElitesGrid, FitnessQueue>(MapElitesGrid(grid_shape))
                 : std::variant<MapElitesGrid, FitnessQueue>(FitnessQueue(queue_capacity))) {}

Archive::Archive(const Archive& other) : kind_(other.kind_), qd_offset_(other.qd_offset_) {
  std::lock_guard lock(other.mutex_);
  store_ = other.store_;
  next_sequence_ = other.next_sequence_;
}

AddResult Archive::add(AgentSnapshot snapshot) {
  if (!std::isfinite(snapshot.fitness)) {
    throw std::invalid_argument("Archive::add: snapshot fitness must be finite");
  }
  std::lock_guard lock(mutex_);
  snapshot.sequence = next_sequence_++;
  return std::visit([&](auto& store) { return store.add(std::move(snapshot)); }, store_);
}

std::vector<AgentSnapshot> Archive::entries_locked() const {
  const auto ptrs = std::visit([](const auto& store) { return store.occupied(); }, store_);
  std::vector<AgentSnapshot> out;
  out.reserve(ptrs.size());
  for (const auto* p : ptrs) out.push_back(*p);
  return out;
}

std::vector<AgentSnapshot> Archive::entries() const {
  std::lock_guard lock(mutex_);
  return entries_locked();
}

std::size_t Archive::size() const {
  std::lock_guard lock(mutex_);
  return std::visit([](const auto& store) { return store.occupied().size(); }, store_);
}

AgentSnapshot Archive::sample_uniform(std::mt19937_64& rng) const {
  std::lock_guard lock(mutex_);
  const auto ptrs = std::visit([](const auto& store) { return store.occupied(); }, store_);
  if (ptrs.empty()) throw std::logic_error("Archive::sample_uniform: archive is empty");
  std::uniform_int_distribution<std::size_t> pick(0, ptrs.size() - 1);
  return *ptrs[pick(rng)];
}

TopM Archive::top_m(int m) const {
  if (m < 1) throw std::invalid_argument("Archive::top_m: M must be positive");
  std::lock_guard lock(mutex_);
  auto ptrs = std::visit([](const auto& store) { return store.occupied(); }, store_);
  if (ptrs.empty()) throw std::logic_error("Archive::top_m: archive is empty");
  std::sort(ptrs.begin(), ptrs.end(), better);
  TopM out;
  for (int k = 0; k < m; ++k) {
    if (k < static_cast<int>(ptrs.size())) {
      out.agents.push_back(*ptrs[k]);
    } else {
      out.agents.push_back(*ptrs.front());
      out.padded = true;
    }
  }
  return out;
}

QdMetrics Archive::qd_metrics() const {
  std::lock_guard lock(mutex_);
  const auto ptrs = std::visit([](const auto& store) { return store.occupied(); }, store_);
  QdMetrics m;
  if (ptrs.empty()) {
    m.max_fitness = m.min_fitness = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  m.max_fitness = -std::numeric_limits<double>::infinity();
  m.min_fitness = std::numeric_limits<double>::infinity();
  for (const auto* p : ptrs) {
    m.max_fitness = std::max(m.max_fitness, p->fitness);
    m.min_fitness = std::min(m.min_fitness, p->fitness);
    m.qd_score += p->fitness - qd_offset_;
  }
  m.coverage = static_cast<int>(ptrs.size());
  return m;
}

std::vector<std::vector<std::optional<double>>> Archive::heatmap() const {
  std::lock_guard lock(mutex_);
  std::vector<std::vector<std::optional<double>>> out;
  if (const auto* grid = std::get_if<MapElitesGrid>(&store_)) {
    out.assign(grid->shape(), std::vector<std::optional<double>>(grid->shape()));
    for (int i = 0; i < grid->shape(); ++i) {
      for (int j = 0; j < grid->shape(); ++j) {
        if (const auto& c = grid->cell(i, j)) out[i][j] = c->fitness;
      }
    }
    return out;
  }
  auto ptrs = std::get<FitnessQueue>(store_).occupied();
  std::sort(ptrs.begin(), ptrs.end(), better);
  out.emplace_back();
  for (const auto* p : ptrs) out.back().push_back(p->fitness);
  return out;
}

void write_heatmap_csv(std::ostream& out,
                       const std::vector<std::vector<std::optional<double>>>& heatmap) {
  out.precision(17);
  for (const auto& row : heatmap) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      if (row[j]) {
        out << *row[j];
      } else {
        out << "null";
      }
    }
    out << '\n';
  }
}

void Archive::save(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  std::vector<AgentSnapshot> snaps;
  nlohmann::json manifest;
  int grid_shape = 0;
  int capacity = 0;
  {
    std::lock_guard lock(mutex_);
    snaps = entries_locked();
    if (const auto* g = std::get_if<MapElitesGrid>(&store_)) {
      grid_shape = g->shape();
    } else {
      capacity = std::get<FitnessQueue>(store_).capacity();
    }
    manifest["next_sequence"] = next_sequence_;
  }
  fs::create_directories(dir / "snapshots");
  for (const auto& entry : fs::directory_iterator(dir / "snapshots")) fs::remove(entry.path());
  manifest["kind"] = to_string(kind_);
  manifest["qd_offset"] = qd_offset_;
  manifest["grid_shape"] = grid_shape;
  manifest["queue_capacity"] = capacity;
  manifest["entries"] = nlohmann::json::array();
  MapElitesGrid indexer(std::max(grid_shape, 1));
  for (const auto& s : snaps) {
    nlohmann::json e = summary_json(s);
    e["blob"] = "snapshots/" + blob_name(s);
    if (kind_ == ArchiveKind::kGrid) {
      const auto [i, j] = indexer.cell_index(s.bd);
      e["cell"] = {i, j};
    }
    manifest["entries"].push_back(std::move(e));
    std::ofstream blob(dir / "snapshots" / blob_name(s), std::ios::binary);
    if (!blob) throw std::runtime_error("cannot write " + (dir / "snapshots").string());
    write_snapshot(blob, s);
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  std::ofstream heat(dir / "heatmap.csv");
  write_heatmap_csv(heat, heatmap());
}

Archive Archive::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("missing archive manifest in " + dir.string());
  const nlohmann::json manifest = nlohmann::json::parse(in);
  const ArchiveKind kind = archive_kind_from_string(manifest.at("kind").get<std::string>());
  Archive archive(kind, manifest.at("qd_offset").get<double>(),
                  std::max(1, manifest.at("grid_shape").get<int>()),
                  std::max(1, manifest.at("queue_capacity").get<int>()));
  for (const auto& e : manifest.at("entries")) {
    std::ifstream blob(dir / e.at("blob").get<std::string>(), std::ios::binary);
    if (!blob) throw std::runtime_error("missing snapshot blob " + e.at("blob").get<std::string>());
    AgentSnapshot s = read_snapshot(blob);
    std::visit([&](auto& store) { store.add(std::move(s)); }, archive.store_);
  }
  archive.next_sequence_ = manifest.at("next_sequence").get<std::uint64_t>();
  return archive;
}

}  // namespace pdo::archive
