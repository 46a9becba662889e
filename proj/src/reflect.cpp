#include "atlas/reflect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace atlas {

GapState GapState::initial(GapVector gaps) {
  validate_gaps(gaps);
  GapState s;
  s.cum_local_times.assign(gaps.size(), 0.0);
  s.gaps = std::move(gaps);
  return s;
}

Eigen::MatrixXd reflection_matrix(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    r(i, i + 1) = -0.5;
    r(i + 1, i) = -0.5;
  }
  return r;
}

Eigen::MatrixXd reflection_matrix_inverse(std::size_t m) {
  if (m == 0) throw std::invalid_argument("reflection matrix needs m >= 1");
  const auto n = static_cast<Eigen::Index>(m);
  const double denom = static_cast<double>(m + 1);
  Eigen::MatrixXd inv(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double lo = static_cast<double>(std::min(i, j) + 1);
      const double hi = static_cast<double>(std::max(i, j) + 1);
      inv(i, j) = 2.0 * lo * (1.0 - hi / denom);
    }
  }
  return inv;
}

// Once the support is stable the fixed point on each maximal run of positive dL
// solves R_SS dL_S = -tent_S exactly, so jump there (Thomas sweep). A run whose
// exact solution is not positive is left to the plain iteration.
void SkorokhodSolver::polish_runs(std::span<double> local_time) {
  const std::size_t m = local_time.size();
  std::size_t a = 0;
  while (a < m) {
    if (!(local_time[a] > 0.0)) {
      ++a;
      continue;
    }
    std::size_t b = a;
    while (b + 1 < m && local_time[b + 1] > 0.0) ++b;
    const std::size_t n = b - a + 1;
    upper_.resize(n);
    rhs_.resize(n);
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sub = i > 0 ? -0.5 : 0.0;
      denom = 1.0 - sub * (i > 0 ? upper_[i - 1] : 0.0);
      upper_[i] = -0.5 / denom;
      rhs_[i] = (-tentative_[a + i] - sub * (i > 0 ? rhs_[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs_[i] -= upper_[i] * rhs_[i + 1];
    if (std::all_of(rhs_.begin(), rhs_.end(), [](double x) { return x > 0.0; })) {
      std::copy(rhs_.begin(), rhs_.end(), local_time.begin() + static_cast<std::ptrdiff_t>(a));
    }
    a = b + 1;
  }
}

SkorokhodSolver::Stats SkorokhodSolver::solve(std::span<double> gaps, std::span<double> local_time,
                                              const SolverOptions& options) {
  const std::size_t m = gaps.size();
  if (local_time.size() != m) throw std::invalid_argument("local time buffer has wrong length");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  std::fill(local_time.begin(), local_time.end(), 0.0);

  active_.clear();
  for (std::size_t g = 0; g < m; ++g) {
    if (!std::isfinite(gaps[g])) throw std::invalid_argument("tentative gaps must be finite");
    if (gaps[g] < 0.0) active_.push_back(g);
  }
  if (active_.empty()) return {};

  tentative_.assign(gaps.begin(), gaps.end());
  marked_.assign(m, 0);
  for (std::size_t g : active_) marked_[g] = 1;

  const int limit = options.iteration_limit(m);
  double residual = INFINITY;
  for (int iter = 1; iter <= limit; ++iter) {
    double change = 0.0;
    pending_.clear();
    for (std::size_t g : active_) {
      const double left = g > 0 ? local_time[g - 1] : 0.0;
      const double right = g + 1 < m ? local_time[g + 1] : 0.0;
      const double v = std::max(0.0, -tentative_[g] + 0.5 * (left + right));
      change = std::max(change, std::abs(v - local_time[g]));
      local_time[g] = v;
      if (v > 0.0) {
        if (g > 0 && !marked_[g - 1]) {
          marked_[g - 1] = 1;
          pending_.push_back(g - 1);
        }
        if (g + 1 < m && !marked_[g + 1]) {
          marked_[g + 1] = 1;
          pending_.push_back(g + 1);
        }
      }
    }
    if (!pending_.empty()) {
      active_.insert(active_.end(), pending_.begin(), pending_.end());
      std::sort(active_.begin(), active_.end());
      continue;
    }
    if (change > options.tolerance) {
      polish_runs(local_time);
      continue;
    }

    residual = 0.0;
    for (std::size_t g : active_) {
      const double left = g > 0 ? local_time[g - 1] : 0.0;
      const double right = g + 1 < m ? local_time[g + 1] : 0.0;
      const double w = tentative_[g] + local_time[g] - 0.5 * (left + right);
      gaps[g] = w;
      residual = std::max(residual, std::abs(std::min(w, local_time[g])));
    }
    if (residual <= options.tolerance) return {iter, residual};
  }
  std::copy(tentative_.begin(), tentative_.end(), gaps.begin());
  throw SolverError("Skorokhod fixed point did not converge", 0, residual, limit);
}

ReflectionSolveResult solve_skorokhod(std::span<const double> tentative, double tolerance,
                                      int max_iterations) {
  ReflectionSolveResult result;
  result.new_gaps.assign(tentative.begin(), tentative.end());
  result.local_time_increments.assign(tentative.size(), 0.0);
  SkorokhodSolver solver;
  const auto stats = solver.solve(result.new_gaps, result.local_time_increments,
                                  SolverOptions{tolerance, max_iterations});
  result.iterations = stats.iterations;
  result.residual = stats.residual;
  return result;
}

RankedStepper::RankedStepper(const ModelSpec& spec, double dt, SolverOptions options)
    : spec_(spec), dt_(dt), options_(options) {
  spec_.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t m = spec_.num_gaps();
  gap_drift_.resize(m);
  for (std::size_t g = 0; g < m; ++g) gap_drift_[g] = (spec_.rank_drifts[g + 1] - spec_.rank_drifts[g]) * dt;
  local_time_.assign(m, 0.0);
}

void RankedStepper::step(GapState& state, std::span<const double> increments) {
  const std::size_t m = spec_.num_gaps();
  if (increments.size() != m + 1) throw std::invalid_argument("need one increment per rank");
  if (state.gaps.size() != m) throw std::invalid_argument("state has wrong number of gaps");
  const auto& b = spec_.rank_diffusions;
  for (std::size_t g = 0; g < m; ++g) {
    state.gaps[g] += gap_drift_[g] + (b[g + 1] * increments[g + 1] - b[g] * increments[g]);
  }
  const auto stats = solver_.solve(state.gaps, local_time_, options_);
  last_residual_ = stats.residual;
  for (std::size_t g = 0; g < m; ++g) state.cum_local_times[g] += local_time_[g];
  state.bottom_position += spec_.rank_drifts[0] * dt_ + b[0] * increments[0] - 0.5 * local_time_[0];
  state.time += dt_;
}

GapState step_ranked(const GapState& state, const ModelSpec& spec, double dt,
                     std::span<const double> increments, double tolerance) {
  RankedStepper stepper(spec, dt, SolverOptions{tolerance, 0});
  GapState next = state;
  stepper.step(next, increments);
  return next;
}

std::uint64_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be >= 0");
  const double ratio = horizon / dt;
  if (ratio > 9.0e15) throw std::invalid_argument("horizon/dt overflows the step counter");
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

std::vector<double> Trajectory::total_local_time() const {
  if (snapshots.empty()) return {};
  return snapshots.back().cum_local_times;
}

void simulate_observed(const ModelSpec& spec, const GapVector& init, const SimulationOptions& options,
                       const NoiseStream& noise, const SampleObserver& observer) {
  spec.validate();
  if (init.size() != spec.num_gaps()) throw std::invalid_argument("initial gaps do not match the model");
  if (options.sample_every == 0) throw std::invalid_argument("sample_every must be positive");
  const std::uint64_t steps = step_count(options.horizon, options.dt);

  RankedStepper stepper(spec, options.dt, options.solver);
  IncrementSource source(noise, spec.num_particles);
  std::vector<double> increments(spec.num_particles);
  const double scale = std::sqrt(options.dt);

  GapState state = GapState::initial(init);
  observer(state, 0);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    source.next(increments, scale);
    try {
      stepper.step(state, increments);
    } catch (const SolverError& e) {
      throw SolverError("reflection failed at step " + std::to_string(n), n, e.residual(), e.iterations());
    }
    state.time = static_cast<double>(n) * options.dt;
    if (n % options.sample_every == 0 || n == steps) observer(state, n);
  }
}

Trajectory simulate(const ModelSpec& spec, const GapVector& init, const SimulationOptions& options,
                    const NoiseStream& noise) {
  Trajectory traj;
  simulate_observed(spec, init, options, noise, [&](const GapState& s, std::uint64_t step) {
    traj.snapshots.push_back(s);
    traj.steps = step;
  });
  return traj;
}

std::vector<std::size_t> particle_ranks(std::span<const double> positions) {
  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return positions[i] < positions[j]; });
  std::vector<std::size_t> rank(positions.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

namespace {

// True when only the bottom rank has its own coefficients.
bool bottom_only(const ModelSpec& spec) {
  for (std::size_t j = 2; j < spec.num_particles; ++j) {
    if (spec.rank_drifts[j] != spec.rank_drifts[1] || spec.rank_diffusions[j] != spec.rank_diffusions[1]) {
      return false;
    }
  }
  return true;
}

}  // namespace

void simulate_unranked_observed(const ModelSpec& spec, const std::vector<double>& init_positions,
                                const SimulationOptions& options, const NoiseStream& noise,
                                const UnrankedObserver& observer) {
  spec.validate();
  const std::size_t n = spec.num_particles;
  if (init_positions.size() != n) throw std::invalid_argument("initial positions do not match the model");
  if (options.sample_every == 0) throw std::invalid_argument("sample_every must be positive");
  const std::uint64_t steps = step_count(options.horizon, options.dt);
  const double dt = options.dt;
  const bool fast = bottom_only(spec);

  IncrementSource source(noise, n);
  std::vector<double> xi(n);
  std::vector<double> y = init_positions;
  std::vector<std::size_t> rank(n, 1);
  const double scale = std::sqrt(dt);

  observer(0.0, y);
  for (std::uint64_t s = 1; s <= steps; ++s) {
    source.next(xi, scale);
    if (fast) {
      // Lowest index among the minima takes rank 0.
      const auto lowest = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = i == lowest ? 0 : 1;
        y[i] += spec.rank_drifts[r] * dt + spec.rank_diffusions[r] * xi[i];
      }
    } else {
      rank = particle_ranks(y);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] += spec.rank_drifts[rank[i]] * dt + spec.rank_diffusions[rank[i]] * xi[i];
      }
    }
    if (s % options.sample_every == 0 || s == steps) observer(static_cast<double>(s) * dt, y);
  }
}

std::vector<RankedSnapshot> simulate_unranked(const ModelSpec& spec,
                                              const std::vector<double>& init_positions,
                                              const SimulationOptions& options,
                                              const NoiseStream& noise) {
  std::vector<RankedSnapshot> out;
  simulate_unranked_observed(spec, init_positions, options, noise,
                             [&](double t, std::span<const double> named) {
                               RankedSnapshot snap;
                               snap.time = t;
                               snap.positions.assign(named.begin(), named.end());
                               std::sort(snap.positions.begin(), snap.positions.end());
                               snap.gaps.resize(snap.positions.size() - 1);
                               for (std::size_t i = 0; i + 1 < snap.positions.size(); ++i) {
                                 snap.gaps[i] = snap.positions[i + 1] - snap.positions[i];
                               }
                               out.push_back(std::move(snap));
                             });
  return out;
}

}  // namespace atlas
