#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "atlas/config.hpp"
#include "atlas/model.hpp"

namespace atlas {

/// Non-finite values or similar numeric breakdowns during a run (exit status 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rank drifts (1 - a/(d+1), -a/(d+1), ..., -d a/(d+1)) with unit diffusions,
/// d + 1 particles. Throws for d < 1 or a <= 0.
ModelSpec alt_model_step_config(std::size_t d, double a);

ModelSpec build_model(const ModelConfig& model);

/// max(4 k, ceil(10 sqrt(horizon))).
std::size_t truncation_heuristic(std::size_t monitored_k, double horizon);

struct DoublingReport {
  std::size_t m = 0;
  std::size_t monitored_k = 0;
  double threshold = 0.0;
  std::vector<double> times;
  std::vector<double> max_abs;   // per monitored gap: max_t |Z^m_i - Z^2m_i|
  std::vector<double> scale;     // per monitored gap: mean_t |Z^2m_i|
  std::vector<double> relative;  // max_abs / scale (0 when both vanish)
  double max_relative = 0.0;
  bool flagged = false;
};

/// Runs the configured model (member 0) at m and 2m gaps. Ranks 0..m share
/// their noise channels; the m-gap start is the first m gaps of the 2m draw.
DoublingReport truncation_doubling_check(const ExperimentConfig& config, std::size_t monitored_k);

/// Runs the experiment and writes its artifacts into `dir` (which must exist).
/// Returns the summary that is also written to summary.json.
nlohmann::json run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Same for the doubling check (doubling.csv + summary.json).
nlohmann::json run_doubling_check(const ExperimentConfig& config, const std::filesystem::path& dir);

inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kResolvedConfigFile = "config.resolved.ini";

enum class RunMode { experiment, doubling_check };

/// Stages the run under `<out>.partial`, writes the resolved config snapshot,
/// and moves the directory into place only on success. Any exception removes
/// the staging directory and propagates.
nlohmann::json execute(const ExperimentConfig& config, const std::filesystem::path& out,
                       RunMode mode = RunMode::experiment);

/// Default run directory: runs/<kind>-seed<seed>.
std::filesystem::path default_output_dir(const ExperimentConfig& config);

}  // namespace atlas
