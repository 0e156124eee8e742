#include "pdo/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "pdo/archive/archive.hpp"
#include "pdo/train/trainer.hpp"

namespace pdo::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCurveNames = {"max_fitness", "min_fitness", "coverage",
                                              "qd_score"};

std::string fmt(double v, int precision = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::string run_name(const train::TrainerConfig& c, std::uint64_t seed) {
  return train::to_string(c.trainer) + "-" + train::to_string(c.env) + "-seed" +
         std::to_string(seed);
}

// Piecewise-linear approximation of the viridis colour map.
std::string colour(double t) {
  static const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                     {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  std::ostringstream s;
  s << "rgb(";
  for (int c = 0; c < 3; ++c) {
    s << (c ? "," : "") << static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  }
  s << ")";
  return s.str();
}

std::vector<std::vector<std::optional<double>>> read_heatmap_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError("report", "missing heatmap " + path.string());
  std::vector<std::vector<std::optional<double>>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::optional<double>> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "null" || cell.empty()) {
        row.emplace_back();
      } else {
        row.emplace_back(std::stod(cell));
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto parse_one = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw CliError("config", "invalid seed list: " + text);
    }
    return std::stoull(s);
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash != std::string::npos) {
      const auto lo = parse_one(item.substr(0, dash));
      const auto hi = parse_one(item.substr(dash + 1));
      if (hi < lo || hi - lo > 10000) throw CliError("config", "invalid seed range: " + item);
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_one(item));
    }
  }
  if (out.empty()) throw CliError("config", "seed list is empty");
  return out;
}

nlohmann::json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError("config", "cannot open config file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CliError("config", path.string() + ": " + e.what());
  }
}

RunSpec make_run_spec(const nlohmann::json& document, const Overrides& overrides) {
  RunSpec spec;
  try {
    const nlohmann::json doc = document.is_null() ? nlohmann::json::object() : document;
    train::TrainerConfig c = train::trainer_config_from_json(doc);
    if (overrides.scale) c.scale = *overrides.scale;
    if (overrides.deterministic) c.deterministic = true;
    spec.config = train::resolve(c);
    if (overrides.seeds) {
      spec.seeds = *overrides.seeds;
    } else if (doc.contains("seeds")) {
      spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      spec.seeds = {spec.config.seed};
    }
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError("config", e.what());
  }
  if (spec.seeds.empty()) throw CliError("config", "seed list is empty");
  return spec;
}

MeanStd mean_and_sample_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

nlohmann::json run(const RunSpec& spec, const fs::path& out, std::ostream* progress) {
  fs::create_directories(out);
  std::map<std::string, std::vector<double>> values;
  nlohmann::json runs = nlohmann::json::array();
  for (std::uint64_t seed : spec.seeds) {
    train::TrainerConfig c = spec.config;
    c.seed = seed;
    const fs::path dir = out / run_name(c, seed);
    fs::create_directories(dir);
    train::MetricsLog log;
    const auto start = std::chrono::steady_clock::now();
    const train::RunResult result = train::train(c, log);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    train::write_run_directory(dir, c, result, secs);
    for (const auto& name : kCurveNames) {
      const auto& v = result.summary.at(name);
      values[name].push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
    runs.push_back(dir.filename().string());
    if (progress) {
      *progress << dir.filename().string() << ": max_fitness=" << result.summary["max_fitness"]
                << " qd_score=" << result.summary["qd_score"]
                << " coverage=" << result.summary["coverage"] << " (" << fmt(secs, 1) << "s)\n";
    }
  }
  nlohmann::json aggregate = {{"trainer", train::to_string(spec.config.trainer)},
                              {"env", train::to_string(spec.config.env)},
                              {"archive", archive::to_string(spec.config.archive)},
                              {"seeds", spec.seeds},
                              {"runs", runs}};
  for (const auto& name : kCurveNames) {
    const MeanStd ms = mean_and_sample_std(values[name]);
    aggregate["metrics"][name] = {{"mean", ms.mean}, {"std", ms.std}, {"values", values[name]}};
  }
  std::ofstream(out / "aggregate_summary.json") << aggregate.dump(2) << '\n';
  return aggregate;
}

std::vector<std::pair<std::string, Curve>> load_curves(const fs::path& run_dir) {
  const fs::path path = run_dir / "metrics.jsonl";
  std::ifstream in(path);
  if (!in) throw CliError("report", "run " + run_dir.string() + " has no metrics.jsonl");
  std::vector<std::pair<std::string, Curve>> out;
  for (const auto& n : kCurveNames) out.emplace_back(n, Curve{});
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json r;
    try {
      r = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw CliError("report", "run " + run_dir.string() + ": malformed metrics line " +
                                   std::to_string(line_no));
    }
    if (r.value("type", "") != "archive") continue;
    const int it = r.at("iteration").get<int>();
    for (auto& [name, curve] : out) {
      const auto& v = r.at(name);
      curve.iterations.push_back(it);
      curve.values.push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
  }
  return out;
}

Band aggregate_curves(const std::vector<Curve>& curves) {
  Band band;
  if (curves.empty()) return band;
  for (std::size_t k = 0; k < curves.front().iterations.size(); ++k) {
    const int it = curves.front().iterations[k];
    std::vector<double> vals;
    for (const auto& c : curves) {
      const auto pos = std::find(c.iterations.begin(), c.iterations.end(), it);
      if (pos == c.iterations.end()) break;
      vals.push_back(c.values[pos - c.iterations.begin()]);
    }
    if (vals.size() != curves.size()) continue;
    const MeanStd ms = mean_and_sample_std(vals);
    band.iterations.push_back(it);
    band.mean.push_back(ms.mean);
    band.std.push_back(ms.std);
  }
  return band;
}

std::string render_heatmap_svg(const std::vector<std::vector<std::optional<double>>>& heatmap,
                               double lo, double hi, const std::string& title) {
  const int cell = 30;
  const int margin = 40;
  const std::size_t rows = heatmap.size();
  std::size_t cols = 0;
  for (const auto& r : heatmap) cols = std::max(cols, r.size());
  const int width = margin * 2 + static_cast<int>(cols) * cell + 60;
  const int height = margin * 2 + static_cast<int>(rows) * cell;
  const double span = hi > lo ? hi - lo : 1.0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\">\n";
  s << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
    << "</text>\n";
  // Cell (i, j): i indexes the first descriptor (x axis), j the second (y axis, upwards).
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < heatmap[i].size(); ++j) {
      const int x = margin + static_cast<int>(i) * cell;
      const int y = margin + static_cast<int>(rows > 1 ? cols - 1 - j : j) * cell;
      const auto& v = heatmap[i][j];
      s << "<rect x=\"" << x << "\" y=\"" << (rows > 1 ? y : margin) << "\" width=\"" << cell
        << "\" height=\"" << cell << "\" fill=\"" << (v ? colour((*v - lo) / span) : "rgb(235,235,235)")
        << "\" stroke=\"white\"";
      if (v) s << "><title>" << fmt(*v) << "</title></rect>\n";
      else s << "/>\n";
    }
  }
  const int bar_x = margin + static_cast<int>(std::max(rows, std::size_t{1})) * cell + 20;
  const int bar_h = std::max(1, static_cast<int>(cols)) * cell;
  for (int k = 0; k < 20; ++k) {
    s << "<rect x=\"" << bar_x << "\" y=\"" << margin + bar_h - (k + 1) * bar_h / 20
      << "\" width=\"12\" height=\"" << bar_h / 20 + 1 << "\" fill=\"" << colour((k + 0.5) / 20.0)
      << "\"/>\n";
  }
  s << "<text x=\"" << bar_x + 16 << "\" y=\"" << margin + 10
    << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(hi) << "</text>\n";
  s << "<text x=\"" << bar_x + 16 << "\" y=\"" << margin + bar_h
    << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(lo) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::string render_curves_svg(const std::vector<std::pair<std::string, Band>>& bands,
                              const std::string& title) {
  const int pw = 320, ph = 200, margin = 50;
  const int width = 2 * (pw + margin) + margin;
  const int height = 2 * (ph + margin) + margin;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\">\n";
  s << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
    << "</text>\n";
  for (std::size_t p = 0; p < bands.size(); ++p) {
    const auto& [name, band] = bands[p];
    const int ox = margin + static_cast<int>(p % 2) * (pw + margin);
    const int oy = margin + static_cast<int>(p / 2) * (ph + margin);
    s << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << ox << "\" y=\"" << oy - 6 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << name << "</text>\n";
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < band.iterations.size(); ++k) {
      if (std::isfinite(band.mean[k])) idx.push_back(k);
    }
    if (idx.empty()) continue;
    double x0 = band.iterations[idx.front()], x1 = band.iterations[idx.back()];
    double y0 = band.mean[idx.front()] - band.std[idx.front()];
    double y1 = band.mean[idx.front()] + band.std[idx.front()];
    for (std::size_t k : idx) {
      y0 = std::min(y0, band.mean[k] - band.std[k]);
      y1 = std::max(y1, band.mean[k] + band.std[k]);
    }
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) {
      y0 -= 1;
      y1 += 1;
    }
    auto px = [&](double x) { return fmt(ox + (x - x0) / (x1 - x0) * pw); };
    auto py = [&](double y) { return fmt(oy + ph - (y - y0) / (y1 - y0) * ph); };
    s << "<polygon fill=\"rgb(120,160,220)\" fill-opacity=\"0.35\" stroke=\"none\" points=\"";
    for (std::size_t k : idx) s << px(band.iterations[k]) << ',' << py(band.mean[k] + band.std[k]) << ' ';
    for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
      s << px(band.iterations[*it]) << ',' << py(band.mean[*it] - band.std[*it]) << ' ';
    }
    s << "\"/>\n<polyline fill=\"none\" stroke=\"rgb(30,70,160)\" stroke-width=\"2\" points=\"";
    for (std::size_t k : idx) s << px(band.iterations[k]) << ',' << py(band.mean[k]) << ' ';
    s << "\"/>\n";
    s << "<text x=\"" << ox - 4 << "\" y=\"" << oy + 10
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(y1) << "</text>\n";
    s << "<text x=\"" << ox - 4 << "\" y=\"" << oy + ph
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(y0) << "</text>\n";
    s << "<text x=\"" << ox << "\" y=\"" << oy + ph + 14
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(x0, 0) << "</text>\n";
    s << "<text x=\"" << ox + pw << "\" y=\"" << oy + ph + 14
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(x1, 0)
      << " (iteration)</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) throw CliError("report", "no run directories given");
  std::map<std::string, std::vector<Curve>> per_metric;
  for (const auto& dir : run_dirs) {
    for (auto& [name, curve] : load_curves(dir)) per_metric[name].push_back(std::move(curve));
  }
  fs::create_directories(out_dir);
  for (const auto& dir : run_dirs) {
    const fs::path archive_dir = dir / "archive";
    std::ifstream manifest_in(archive_dir / "manifest.json");
    if (!manifest_in) throw CliError("report", "run " + dir.string() + " has no archive manifest");
    const nlohmann::json manifest = nlohmann::json::parse(manifest_in);
    const double lo = manifest.at("qd_offset").get<double>();
    const auto heatmap = read_heatmap_csv(archive_dir / "heatmap.csv");
    double hi = lo;
    for (const auto& row : heatmap) {
      for (const auto& v : row) {
        if (v) hi = std::max(hi, *v);
      }
    }
    const std::string name = fs::path(dir).lexically_normal().filename().string().empty()
                                 ? fs::path(dir).lexically_normal().parent_path().filename().string()
                                 : fs::path(dir).lexically_normal().filename().string();
    std::ofstream(out_dir / ("heatmap_" + name + ".svg"))
        << render_heatmap_svg(heatmap, lo, hi, "Archive " + name);
  }
  std::vector<std::pair<std::string, Band>> bands;
  for (const auto& name : kCurveNames) bands.emplace_back(name, aggregate_curves(per_metric[name]));

  std::ofstream csv(out_dir / "curves.csv");
  csv << "iteration";
  for (const auto& [name, _] : bands) csv << ',' << name << "_mean," << name << "_std";
  csv << '\n';
  csv << std::setprecision(17);
  const Band& ref = bands.front().second;
  for (std::size_t k = 0; k < ref.iterations.size(); ++k) {
    csv << ref.iterations[k];
    for (const auto& [name, band] : bands) {
      csv << ',';
      if (k < band.mean.size() && std::isfinite(band.mean[k])) {
        csv << band.mean[k] << ',' << band.std[k];
      } else {
        csv << ',';
      }
    }
    csv << '\n';
  }
  std::ofstream(out_dir / "curves.svg")
      << render_curves_svg(bands, "Archive metrics over " + std::to_string(run_dirs.size()) +
                                      " run(s), mean and sample std");
}

}  // namespace pdo::cli
