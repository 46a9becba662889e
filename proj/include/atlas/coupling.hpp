#pragma once

#include <cstddef>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/noise.hpp"
#include "atlas/reflect.hpp"

namespace atlas {

/// A sampled path of gap differences: values[s][i] = Delta Z_{i+1}(times[s]).
struct DeltaPath {
  std::vector<double> times;
  std::vector<GapVector> values;

  std::size_t num_coordinates() const { return values.empty() ? 0 : values.front().size(); }
  double l1(std::size_t sample) const;
};

/// Two synchronously coupled ranked systems on a shared sample grid.
/// Delta quantities are upper minus lower.
struct CoupledRecord {
  std::vector<double> times;
  std::vector<GapVector> gaps_lower;
  std::vector<GapVector> gaps_upper;
  std::vector<std::vector<double>> local_lower;  // cumulative L per sample
  std::vector<std::vector<double>> local_upper;
  std::vector<double> sum_delta_z;  // sum_j Delta Z_j(t)
  std::vector<double> delta_l1;     // Delta L_1(t)
  std::vector<double> delta_lm;     // Delta L_m(t)
  /// max over samples and coordinates of (Z^lower - Z^upper)_+
  double monotone_violation = 0.0;
  /// max over coordinates and consecutive samples of Delta L_i(t) - Delta L_i(s), clipped at 0.
  double local_time_increase = 0.0;

  std::size_t num_gaps() const { return gaps_lower.empty() ? 0 : gaps_lower.front().size(); }
  DeltaPath delta_path() const;
};

/// Runs two copies in lockstep, both consuming the same rank increments.
CoupledRecord couple_models(const ModelSpec& spec_lower, const ModelSpec& spec_upper,
                            const GapVector& init_lower, const GapVector& init_upper,
                            const SimulationOptions& options, const NoiseStream& noise);

CoupledRecord couple(const ModelSpec& spec, const GapVector& init_lower, const GapVector& init_upper,
                     const SimulationOptions& options, const NoiseStream& noise);

/// Couples `spec` (lower copy) against the same model with bottom drift gamma
/// (upper copy), both started from `init`. Rejects gamma > 1.
CoupledRecord drift_domination_run(const ModelSpec& spec, const GapVector& init, double gamma,
                                   const SimulationOptions& options, const NoiseStream& noise);

struct L1IdentityReport {
  double max_defect = 0.0;
  /// (1/2) |Delta L_m(t)| per sample.
  std::vector<double> boundary_term;
};

/// max_t | sum Delta Z(t) - sum Delta Z(0) - Delta L_1(t)/2 - Delta L_m(t)/2 |.
L1IdentityReport verify_l1_identity(const CoupledRecord& record);

}  // namespace atlas
