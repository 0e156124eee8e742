#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdo/cli/commands.hpp"

namespace {

int fail(const std::string& kind, const std::string& message) {
  nlohmann::json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population diversity training driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string seeds;
  double scale = 0.0;
  std::string out_dir = "runs";
  bool deterministic = false;

  auto* run = app.add_subcommand("run", "Train every seed of a configuration");
  run->add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  run->add_option("--seeds", seeds, "Seed list, e.g. 0,1,2 or 0-4");
  run->add_option("--scale", scale, "Step-budget scale factor");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--deterministic", deterministic, "Sequential, bit-reproducible execution");

  auto* validate = app.add_subcommand("validate", "Resolve and check a configuration");
  validate->add_option("--config", config_path, "JSON config file");
  validate->add_option("--seeds", seeds, "Seed list");
  validate->add_option("--scale", scale, "Step-budget scale factor");
  validate->add_flag("--deterministic", deterministic, "Sequential execution");

  std::vector<std::string> run_dirs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render heatmaps and metric curves");
  report->add_option("runs", run_dirs, "Run directories")->required();
  report->add_option("--out", report_out, "Report directory (default: <first run>/../report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*report) {
      std::filesystem::path out = report_out;
      if (out.empty()) {
        out = std::filesystem::path(run_dirs.front()).lexically_normal().parent_path() / "report";
      }
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      pdo::cli::report(dirs, out);
      std::cout << nlohmann::json{{"report", out.string()}}.dump() << '\n';
      return 0;
    }

    pdo::cli::Overrides overrides;
    if (!seeds.empty()) overrides.seeds = pdo::cli::parse_seeds(seeds);
    if (scale != 0.0) overrides.scale = scale;
    overrides.deterministic = deterministic;
    const nlohmann::json document =
        config_path.empty() ? nlohmann::json() : pdo::cli::load_json_file(config_path);
    const pdo::cli::RunSpec spec = pdo::cli::make_run_spec(document, overrides);

    if (*validate) {
      nlohmann::json resolved = pdo::train::to_json(spec.config);
      resolved["seeds"] = spec.seeds;
      std::cout << resolved.dump(2) << '\n';
      return 0;
    }
    const nlohmann::json aggregate = pdo::cli::run(spec, out_dir, &std::cerr);
    std::cout << aggregate.dump(2) << '\n';
    return 0;
  } catch (const pdo::cli::CliError& e) {
    return fail(e.kind, e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
}
