#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/stats.hpp"

namespace atlas {

/// Parse or validation failure in an experiment config (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { stationarity, coupling, excursions, doa, bounds, alt_model };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct ModelConfig {
  std::string family = "atlas";  // atlas | alt | general
  std::size_t particles = 4;
  double gamma = 1.0;             // atlas bottom drift
  double a = 1.0;                 // alt family parameter
  std::vector<double> drifts;     // general family, one per rank
  std::vector<double> diffusions; // general family, one per rank (default 1)
  double dt = 1e-3;
  double horizon = 10.0;
  double burn_in = 0.0;
  std::uint64_t sample_every = 1;
  double solver_tolerance = 1e-12;
  int solver_max_iterations = 0;

  std::size_t num_gaps() const { return particles - 1; }
};

struct CouplingConfig {
  std::string upper = "shift";  // shift | scale | same | independent
  double factor = 2.0;          // scale: upper = factor * lower
  std::size_t shift_index = 1;  // shift: upper gap shift_index += shift
  double shift = 1.0;
  std::optional<double> upper_gamma;  // bottom drift of the upper copy
  std::size_t runs = 1;
  bool write_paths = true;
};

struct AnalysisConfig {
  std::size_t k = 1;
  double epsilon = 0.1;
  double zero_threshold = 1e-11;
  double domination = 1.0;
  std::vector<double> t_grid;
  std::size_t ensemble_size = 1;
  double spacing = 0.1;
  double a_target = 0.0;
  std::string target = "product_form";  // product_form | pi_a | pi_a_d
  double mean_tolerance = 0.05;
  double ks_tolerance = 0.03;
  double decrement_slack = 1e-3;
  double doubling_threshold = 1e-3;
  std::string trajectories = "first";  // first | all | none
};

struct BoundsConfig {
  std::vector<BoundSweepPoint> points;
  std::size_t runs = 1000;
  double dt = 0.0;  // 0 uses model.dt
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::stationarity;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string output;
  ModelConfig model;
  InitialCondition initial;
  std::optional<InitialCondition> upper_initial;
  CouplingConfig coupling;
  AnalysisConfig analysis;
  BoundsConfig bounds;
};

/// Reads the INI text. Relative `file =` paths resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError on the first invalid or inconsistent parameter.
void validate_config(const ExperimentConfig& config);

/// Fully resolved INI text; parsing it back yields the same config.
std::string render_config(const ExperimentConfig& config);

}  // namespace atlas
