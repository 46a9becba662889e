#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atlas/model.hpp"
#include "atlas/noise.hpp"

namespace atlas {

/// One time slice of the ranked system.
struct GapState {
  double time = 0.0;
  GapVector gaps;                      // Z_1..Z_m
  std::vector<double> cum_local_times; // L_1..L_m
  double bottom_position = 0.0;        // X_0

  static GapState initial(GapVector gaps);
};

struct ReflectionSolveResult {
  GapVector new_gaps;
  std::vector<double> local_time_increments;
  int iterations = 0;
  double residual = 0.0;
};

/// Thrown when the fixed-point reflection does not reach the tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::uint64_t step, double residual, int iterations)
      : std::runtime_error(what), step_(step), residual_(residual), iterations_(iterations) {}

  std::uint64_t step() const { return step_; }
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  std::uint64_t step_;
  double residual_;
  int iterations_;
};

/// Tridiagonal R^(m): 1 on the diagonal, -1/2 next to it.
Eigen::MatrixXd reflection_matrix(std::size_t m);
/// Closed form (R^(m))^{-1}_{ij} = 2 min(i,j) (1 - max(i,j)/(m+1)).
Eigen::MatrixXd reflection_matrix_inverse(std::size_t m);

struct SolverOptions {
  double tolerance = 1e-12;
  int max_iterations = 0;  // 0 selects 10 m + 100

  int iteration_limit(std::size_t m) const {
    return max_iterations > 0 ? max_iterations : static_cast<int>(10 * m + 100);
  }
};

/// Discrete one-step Skorokhod problem on the gap orthant:
///   w = tentative + R dL,  w >= 0,  dL >= 0,  w_i dL_i = 0.
/// Solved by the monotone fixed point dL_i <- max(0, -tent_i + (dL_{i-1} + dL_{i+1})/2)
/// started from dL = 0, updating in place and only over the clusters of indices
/// that can carry local time. Once the support stops growing, each run of positive
/// dL is replaced by the exact solution on that run, which the next sweep confirms.
/// Holds its scratch buffers between calls.
class SkorokhodSolver {
 public:
  struct Stats {
    int iterations = 0;
    double residual = 0.0;
  };

  /// On entry `gaps` holds the tentative gaps; on exit the reflected gaps.
  /// `local_time` receives dL. Throws SolverError (step 0) on non-convergence.
  Stats solve(std::span<double> gaps, std::span<double> local_time, const SolverOptions& options);

 private:
  std::vector<std::size_t> active_;
  std::vector<std::size_t> pending_;
  std::vector<char> marked_;
  std::vector<double> tentative_;
  std::vector<double> upper_;
  std::vector<double> rhs_;

  void polish_runs(std::span<double> local_time);
};

ReflectionSolveResult solve_skorokhod(std::span<const double> tentative, double tolerance,
                                      int max_iterations);

/// Advances a ranked state by one Euler step with gap-level reflection.
class RankedStepper {
 public:
  RankedStepper(const ModelSpec& spec, double dt, SolverOptions options = {});

  /// `increments` are the m+1 rank Brownian increments (already scaled by sqrt(dt)).
  void step(GapState& state, std::span<const double> increments);

  const ModelSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  /// Local-time increments of the last step.
  std::span<const double> last_local_time() const { return local_time_; }
  double last_residual() const { return last_residual_; }

 private:
  ModelSpec spec_;
  double dt_;
  SolverOptions options_;
  std::vector<double> gap_drift_;  // (a_i - a_{i-1}) dt
  std::vector<double> local_time_;
  SkorokhodSolver solver_;
  double last_residual_ = 0.0;
};

GapState step_ranked(const GapState& state, const ModelSpec& spec, double dt,
                     std::span<const double> increments, double tolerance = 1e-12);

struct SimulationOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t sample_every = 1;
  SolverOptions solver;
};

/// Number of Euler steps covering `horizon` (rounded to the nearest step when
/// horizon/dt is within rounding of an integer, otherwise rounded up).
std::uint64_t step_count(double horizon, double dt);

struct Trajectory {
  std::vector<GapState> snapshots;
  std::uint64_t steps = 0;
  /// Total local time per gap at the final step.
  std::vector<double> total_local_time() const;
};

/// Called at step 0, every `sample_every` steps, and at the final step.
using SampleObserver = std::function<void(const GapState& state, std::uint64_t step)>;

void simulate_observed(const ModelSpec& spec, const GapVector& init, const SimulationOptions& options,
                       const NoiseStream& noise, const SampleObserver& observer);

Trajectory simulate(const ModelSpec& spec, const GapVector& init, const SimulationOptions& options,
                    const NoiseStream& noise);

// Unranked engine ----------------------------------------------------------

struct RankedSnapshot {
  double time = 0.0;
  std::vector<double> positions;  // sorted
  GapVector gaps;
};

/// Ranks of named particles: rank[i] is the rank of particle i, ties broken by
/// lower index first.
std::vector<std::size_t> particle_ranks(std::span<const double> positions);

using UnrankedObserver = std::function<void(double time, std::span<const double> named_positions)>;

/// Steps named particles Y_i with drift a_rank(i) and diffusion b_rank(i), where
/// particle i is driven by noise channel i. No local times are produced.
void simulate_unranked_observed(const ModelSpec& spec, const std::vector<double>& init_positions,
                                const SimulationOptions& options, const NoiseStream& noise,
                                const UnrankedObserver& observer);

std::vector<RankedSnapshot> simulate_unranked(const ModelSpec& spec,
                                              const std::vector<double>& init_positions,
                                              const SimulationOptions& options,
                                              const NoiseStream& noise);

}  // namespace atlas
