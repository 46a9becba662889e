// atlas-lab: config-driven experiment runner.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "atlas/config.hpp"
#include "atlas/experiment.hpp"
#include "atlas/reflect.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_run_flags) {
  sub->add_option("--config", c.config, "experiment config (INI)")->required();
  if (with_run_flags) {
    sub->add_option("--seed", c.seed, "override experiment.seed");
    sub->add_option("--workers", c.workers, "override experiment.workers");
    sub->add_option("--out", c.out, "run directory (default: experiment.output or runs/<kind>-seed<seed>)");
  }
}

atlas::ExperimentConfig load(const Common& c) {
  atlas::ExperimentConfig cfg = atlas::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.workers) cfg.workers = *c.workers;
  if (!c.out.empty()) cfg.output = c.out;
  atlas::validate_config(cfg);
  return cfg;
}

void report(const nlohmann::json& summary, const std::filesystem::path& dir) {
  std::cout << "wrote " << (dir / atlas::kSummaryFile).string() << "\n";
  for (const char* key : {"all_means_within_tolerance", "all_ks_within_tolerance", "max_l1_defect",
                          "max_monotone_violation", "all_valid", "flagged", "trend"}) {
    if (summary.contains(key)) std::cout << "  " << key << " = " << summary[key].dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo lab for truncated Atlas and rank-based diffusions"};
  app.require_subcommand(1);

  Common common;
  const char* kinds[] = {"stationarity", "coupling", "excursions", "doa", "bounds", "alt-model"};
  for (const char* kind : kinds) {
    add_common(app.add_subcommand(kind, std::string("run a ") + kind + " experiment"), common, true);
  }
  add_common(app.add_subcommand("doubling-check", "compare the run at m and 2m gaps"), common, true);
  add_common(app.add_subcommand("validate-config", "parse, validate and print the resolved config"), common,
             false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    atlas::ExperimentConfig cfg = load(common);
    if (sub == "validate-config") {
      std::cout << atlas::render_config(cfg);
      return kExitOk;
    }
    const auto dir = atlas::default_output_dir(cfg);
    if (sub == "doubling-check") {
      report(atlas::execute(cfg, dir, atlas::RunMode::doubling_check), dir);
      return kExitOk;
    }
    if (atlas::to_string(cfg.kind) != sub) {
      throw atlas::ConfigError("config is a '" + atlas::to_string(cfg.kind) + "' experiment, not '" + sub + "'");
    }
    report(atlas::execute(cfg, dir), dir);
    return kExitOk;
  } catch (const atlas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const atlas::SolverError& e) {
    std::cerr << "numeric failure: " << e.what() << " (step " << e.step() << ", residual " << e.residual()
              << ", iterations " << e.iterations() << ")\n";
    return kExitNumeric;
  } catch (const atlas::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
