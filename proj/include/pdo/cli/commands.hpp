#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdo/train/config.hpp"

namespace pdo::cli {

// Error raised for invalid configuration or command-line input; reported as
// {"error": {"kind": ..., "message": ...}} by the executable.
struct CliError : std::runtime_error {
  CliError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind(std::move(kind)) {}
  std::string kind;
};

struct RunSpec {
  train::TrainerConfig config;  // resolved
  std::vector<std::uint64_t> seeds;
};

struct Overrides {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<double> scale;
  bool deterministic = false;
};

// Parses a comma-separated seed list ("0,1,2") or a range ("0-4").
std::vector<std::uint64_t> parse_seeds(const std::string& text);

// Builds and validates a run spec from a config document (may be null for all
// defaults). Throws CliError{"config", ...}.
RunSpec make_run_spec(const nlohmann::json& document, const Overrides& overrides);
nlohmann::json load_json_file(const std::filesystem::path& path);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (0 for a single value)
};
MeanStd mean_and_sample_std(std::span<const double> values);

// Runs every seed into out/<trainer>-<env>-seed<k>/ and writes
// out/aggregate_summary.json; returns the aggregate document.
nlohmann::json run(const RunSpec& spec, const std::filesystem::path& out,
                   std::ostream* progress = nullptr);

struct Curve {
  std::vector<int> iterations;
  std::vector<double> values;
};

// Archive-record series (max_fitness, min_fitness, coverage, qd_score) read
// from a run's metrics.jsonl. Throws CliError{"report", ...} naming the run
// when the file is missing or malformed.
std::vector<std::pair<std::string, Curve>> load_curves(const std::filesystem::path& run_dir);

struct Band {
  std::vector<int> iterations;
  std::vector<double> mean;
  std::vector<double> std;
};
// Aggregates curves over runs at the iterations all runs share.
Band aggregate_curves(const std::vector<Curve>& curves);

std::string render_heatmap_svg(const std::vector<std::vector<std::optional<double>>>& heatmap,
                               double lo, double hi, const std::string& title);
std::string render_curves_svg(const std::vector<std::pair<std::string, Band>>& bands,
                              const std::string& title);

// Writes heatmap_<run>.svg per run, curves.csv and curves.svg into out_dir.
void report(const std::vector<std::filesystem::path>& run_dirs,
            const std::filesystem::path& out_dir);

}  // namespace pdo::cli
