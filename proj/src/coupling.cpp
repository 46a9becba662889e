#include "atlas/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace atlas {

double DeltaPath::l1(std::size_t sample) const {
  const auto& v = values.at(sample);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

DeltaPath CoupledRecord::delta_path() const {
  DeltaPath path;
  path.times = times;
  path.values.reserve(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    GapVector d(gaps_upper[s].size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = gaps_upper[s][i] - gaps_lower[s][i];
    path.values.push_back(std::move(d));
  }
  return path;
}

CoupledRecord couple_models(const ModelSpec& spec_lower, const ModelSpec& spec_upper,
                            const GapVector& init_lower, const GapVector& init_upper,
                            const SimulationOptions& options, const NoiseStream& noise) {
  spec_lower.validate();
  spec_upper.validate();
  if (spec_lower.num_particles != spec_upper.num_particles) {
    throw std::invalid_argument("coupled models must have the same number of particles");
  }
  const std::size_t m = spec_lower.num_gaps();
  if (init_lower.size() != m || init_upper.size() != m) {
    throw std::invalid_argument("initial gaps do not match the model");
  }
  if (options.sample_every == 0) throw std::invalid_argument("sample_every must be positive");
  const std::uint64_t steps = step_count(options.horizon, options.dt);

  RankedStepper lower_stepper(spec_lower, options.dt, options.solver);
  RankedStepper upper_stepper(spec_upper, options.dt, options.solver);
  IncrementSource source(noise, spec_lower.num_particles);
  std::vector<double> increments(spec_lower.num_particles);
  const double scale = std::sqrt(options.dt);

  GapState lower = GapState::initial(init_lower);
  GapState upper = GapState::initial(init_upper);

  CoupledRecord rec;
  auto record = [&]() {
    rec.times.push_back(lower.time);
    rec.gaps_lower.push_back(lower.gaps);
    rec.gaps_upper.push_back(upper.gaps);
    rec.local_lower.push_back(lower.cum_local_times);
    rec.local_upper.push_back(upper.cum_local_times);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum += upper.gaps[i] - lower.gaps[i];
      rec.monotone_violation = std::max(rec.monotone_violation, lower.gaps[i] - upper.gaps[i]);
    }
    rec.sum_delta_z.push_back(sum);
    rec.delta_l1.push_back(upper.cum_local_times[0] - lower.cum_local_times[0]);
    rec.delta_lm.push_back(upper.cum_local_times[m - 1] - lower.cum_local_times[m - 1]);
    const std::size_t s = rec.times.size();
    if (s >= 2) {
      for (std::size_t i = 0; i < m; ++i) {
        const double now = rec.local_upper[s - 1][i] - rec.local_lower[s - 1][i];
        const double before = rec.local_upper[s - 2][i] - rec.local_lower[s - 2][i];
        rec.local_time_increase = std::max(rec.local_time_increase, now - before);
      }
    }
  };

  record();
  for (std::uint64_t n = 1; n <= steps; ++n) {
    source.next(increments, scale);
    try {
      lower_stepper.step(lower, increments);
      upper_stepper.step(upper, increments);
    } catch (const SolverError& e) {
      throw SolverError("reflection failed at step " + std::to_string(n), n, e.residual(), e.iterations());
    }
    lower.time = upper.time = static_cast<double>(n) * options.dt;
    if (n % options.sample_every == 0 || n == steps) record();
  }
  return rec;
}

CoupledRecord couple(const ModelSpec& spec, const GapVector& init_lower, const GapVector& init_upper,
                     const SimulationOptions& options, const NoiseStream& noise) {
  return couple_models(spec, spec, init_lower, init_upper, options, noise);
}

CoupledRecord drift_domination_run(const ModelSpec& spec, const GapVector& init, double gamma,
                                   const SimulationOptions& options, const NoiseStream& noise) {
  if (!(gamma <= 1.0)) throw std::invalid_argument("drift domination needs gamma <= 1");
  return couple_models(spec, spec.with_bottom_drift(gamma), init, init, options, noise);
}

L1IdentityReport verify_l1_identity(const CoupledRecord& record) {
  L1IdentityReport report;
  if (record.times.empty()) return report;
  const double base = record.sum_delta_z.front();
  for (std::size_t s = 0; s < record.times.size(); ++s) {
    const double defect =
        record.sum_delta_z[s] - base - 0.5 * record.delta_l1[s] - 0.5 * record.delta_lm[s];
    report.max_defect = std::max(report.max_defect, std::abs(defect));
    report.boundary_term.push_back(0.5 * std::abs(record.delta_lm[s]));
  }
  return report;
}

}  // namespace atlas
