#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/noise.hpp"
#include "atlas/reflect.hpp"

namespace atlas {

/// Right-continuous empirical CDF of a finite sample.
class Ecdf {
 public:
  Ecdf() = default;
  explicit Ecdf(std::vector<double> samples);

  double operator()(double x) const;
  std::size_t size() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Occupancy ECDFs of the first k gaps; ecdfs[h][c] uses every retained sample
/// with time <= t_grid[h].
struct OccupancyEstimate {
  std::size_t k = 0;
  std::vector<double> t_grid;
  double spacing = 0.0;
  std::size_t thinning = 1;  // retained one sample in `thinning` offered ones (first pair)
  std::vector<std::vector<Ecdf>> ecdfs;

  const Ecdf& at(std::size_t horizon_index, std::size_t coordinate) const {
    return ecdfs.at(horizon_index).at(coordinate);
  }
};

/// Streaming collector for occupancy estimates: keeps the first k gaps of
/// samples spaced at least `spacing` time units apart.
class OccupancyRecorder {
 public:
  OccupancyRecorder(std::size_t k, double spacing = 0.1);

  void observe(double time, std::span<const double> gaps);
  OccupancyEstimate estimate(const std::vector<double>& t_grid) const;

  std::size_t retained() const { return times_.size(); }

 private:
  std::size_t k_;
  double spacing_;
  std::size_t offered_ = 0;
  std::size_t thinning_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;  // values_[c][s]
};

OccupancyEstimate occupancy(const std::vector<GapState>& samples, std::size_t k,
                            const std::vector<double>& t_grid, double spacing = 0.1);

/// sup |F_n - (1 - exp(-rate x))| checked on both sides of every jump.
double ks_to_exponential(const Ecdf& ecdf, double rate);
double ks_two_sample(const Ecdf& a, const Ecdf& b);
/// c(alpha) sqrt((n + m) / (n m)) with c(alpha) = sqrt(-log(alpha / 2) / 2).
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

/// Standard normal upper tail, 0.5 erfc(x / sqrt 2).
double normal_tail(double x);

struct BoundQuery {
  std::size_t k = 1;
  std::size_t l = 1;
  std::size_t d = 1;
  double t = 1.0;
  double gamma = 0.0;
  std::vector<double> positions;  // Y_0(0), ..., Y_m(0)
};

struct BoundValues {
  double sup_bound = 0.0;  // bound on P(sup_{[0,t]} Y_(k) >= Gamma)
  double inf_bound = 0.0;  // bound on P(inf_{[0,t]} inf_{i>=d} Y_i <= Gamma)
  bool sup_clamped = false;
  bool inf_clamped = false;
};

BoundValues analytic_bounds(const BoundQuery& query);

/// One point of a bound sweep. Gamma is relative to the start: the sup event
/// uses Gamma = Y_k(0) + level and the inf event Gamma = Y_d(0) - level.
struct BoundSweepPoint {
  std::size_t k = 1;
  std::size_t l = 1;
  std::size_t d = 1;
  double t = 1.0;
  double level = 1.0;
};

struct BoundSweepResult {
  BoundSweepPoint point;
  double bound_sup = 0.0;  // mean over runs of the clamped conditional bound
  double bound_inf = 0.0;
  double empirical_sup = 0.0;
  double empirical_inf = 0.0;
  double se_sup = 0.0;
  double se_inf = 0.0;
  std::size_t clamped_sup = 0;
  std::size_t clamped_inf = 0;
  std::size_t runs = 0;
};

struct BoundSweepOptions {
  std::size_t runs = 10000;
  double dt = 1e-3;
  std::size_t workers = 1;
};

/// Runs the unranked engine from `init` (positions = prefix sums of the gaps)
/// and counts both tail events for every point along each run.
std::vector<BoundSweepResult> bound_sweep(const ModelSpec& spec, const InitialCondition& init,
                                          const std::vector<BoundSweepPoint>& points,
                                          const BoundSweepOptions& options, const NoiseStream& noise);

struct DoaOptions {
  double dt = 1e-3;
  double spacing = 0.1;
  std::size_t workers = 1;
  SolverOptions solver;
};

struct DoaRow {
  double horizon = 0.0;
  std::size_t coordinate = 1;  // 1-based gap index
  double ks_mean = 0.0;
  double ks_se = 0.0;
  double ks_pooled = 0.0;  // KS of the ECDF pooled over members
  bool trend = false;      // strictly decreasing ks_mean along t_grid for this coordinate
};

struct DoaReport {
  double a_target = 0.0;
  std::size_t k = 0;
  std::vector<double> t_grid;
  std::size_t ensemble_size = 0;
  std::size_t thinning = 1;
  std::vector<std::vector<std::vector<double>>> ks;  // ks[member][h][c]
  std::vector<DoaRow> rows;                         // horizon-major
  std::vector<bool> trend;                          // per coordinate
  std::vector<bool> pooled_trend;

  const DoaRow& row(std::size_t horizon_index, std::size_t coordinate_index) const {
    return rows.at(horizon_index * k + coordinate_index);
  }
};

/// Ensemble of occupancy estimates; member j uses noise.child(j) and draws its
/// initial gaps from that child's sampling channel.
DoaReport doa_experiment(const ModelSpec& spec, const InitialCondition& init, double a_target,
                         std::size_t k, const std::vector<double>& t_grid, std::size_t ensemble_size,
                         const DoaOptions& options, const NoiseStream& noise);

/// True when every entry is strictly below the previous one.
bool strictly_decreasing(std::span<const double> values);

}  // namespace atlas
