#include "atlas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "atlas/parallel.hpp"

namespace atlas {

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  for (double x : sorted_) {
    if (std::isnan(x)) throw std::invalid_argument("ECDF sample is NaN");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  if (sorted_.empty()) throw std::logic_error("empty ECDF");
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

OccupancyRecorder::OccupancyRecorder(std::size_t k, double spacing)
    : k_(k), spacing_(spacing), values_(k) {
  if (k == 0) throw std::invalid_argument("occupancy needs k >= 1");
  if (!(spacing >= 0.0)) throw std::invalid_argument("sample spacing must be >= 0");
}

void OccupancyRecorder::observe(double time, std::span<const double> gaps) {
  if (gaps.size() < k_) throw std::invalid_argument("k exceeds the number of gaps");
  ++offered_;
  if (!times_.empty()) {
    if (time < times_.back()) throw std::invalid_argument("occupancy samples must be time ordered");
    // Relative slack so a grid of exact multiples of `spacing` is not skipped by rounding.
    if (time - times_.back() < spacing_ * (1.0 - 1e-9)) return;
  }
  if (times_.size() == 1) thinning_ = offered_ - 1;
  times_.push_back(time);
  for (std::size_t c = 0; c < k_; ++c) values_[c].push_back(gaps[c]);
}

OccupancyEstimate OccupancyRecorder::estimate(const std::vector<double>& t_grid) const {
  if (t_grid.empty()) throw std::invalid_argument("t_grid is empty");
  for (std::size_t h = 0; h < t_grid.size(); ++h) {
    if (!(t_grid[h] > 0.0)) throw std::invalid_argument("t_grid entries must be positive");
    if (h > 0 && !(t_grid[h] > t_grid[h - 1])) throw std::invalid_argument("t_grid must be increasing");
  }
  const double slack = 1e-9 * std::max(1.0, t_grid.back());
  if (times_.empty() || times_.back() < t_grid.back() - slack) {
    throw std::invalid_argument("t_grid extends beyond the trajectory");
  }
  OccupancyEstimate est;
  est.k = k_;
  est.t_grid = t_grid;
  est.spacing = spacing_;
  est.thinning = std::max<std::size_t>(1, thinning_);
  for (double horizon : t_grid) {
    const auto end = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), horizon + slack) - times_.begin());
    std::vector<Ecdf> row;
    row.reserve(k_);
    for (std::size_t c = 0; c < k_; ++c) {
      row.emplace_back(std::vector<double>(values_[c].begin(), values_[c].begin() + end));
    }
    est.ecdfs.push_back(std::move(row));
  }
  return est;
}

OccupancyEstimate occupancy(const std::vector<GapState>& samples, std::size_t k,
                            const std::vector<double>& t_grid, double spacing) {
  if (!samples.empty() && k > samples.front().gaps.size()) throw std::invalid_argument("k exceeds m");
  OccupancyRecorder rec(k, spacing);
  for (const auto& s : samples) rec.observe(s.time, s.gaps);
  return rec.estimate(t_grid);
}

double ks_to_exponential(const Ecdf& ecdf, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be positive");
  if (ecdf.empty()) throw std::invalid_argument("empty ECDF");
  const auto& x = ecdf.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = -std::expm1(-rate * std::max(0.0, x[i]));
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(const Ecdf& a, const Ecdf& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty ECDF");
  const auto& x = a.sorted();
  const auto& y = b.sorted();
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
  if (n == 0 || m == 0) throw std::invalid_argument("sample sizes must be positive");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

BoundValues analytic_bounds(const BoundQuery& q) {
  if (!(q.t > 0.0)) throw std::invalid_argument("t must be positive");
  if (q.l < 1 || q.d < 1) throw std::invalid_argument("l and d must be >= 1");
  const auto& y = q.positions;
  if (q.k >= y.size() || q.l > y.size() || q.d >= y.size()) {
    throw std::invalid_argument("positions do not cover k, l and d");
  }
  const double t = q.t;
  const double l = static_cast<double>(q.l);
  double head = 0.0;
  for (std::size_t j = 0; j < q.l; ++j) head += y[j];
  const double rise = q.gamma - y[q.k];
  const double first = 2.0 * normal_tail((l * rise / 3.0 - t - head) / std::sqrt(l * t));
  const double second =
      4.0 * static_cast<double>(q.k + 1) * normal_tail(rise / (3.0 * std::sqrt(t)));
  BoundValues out;
  out.sup_bound = first + second;
  double inf = 0.0;
  for (std::size_t i = q.d; i < y.size(); ++i) inf += normal_tail((y[i] - q.gamma) / std::sqrt(t));
  out.inf_bound = 2.0 * inf;
  if (out.sup_bound > 1.0) {
    out.sup_bound = 1.0;
    out.sup_clamped = true;
  }
  if (out.inf_bound > 1.0) {
    out.inf_bound = 1.0;
    out.inf_clamped = true;
  }
  return out;
}

namespace {

struct RunTally {
  std::vector<char> sup_hit, inf_hit;
  std::vector<BoundValues> bounds;
};

}  // namespace

std::vector<BoundSweepResult> bound_sweep(const ModelSpec& spec, const InitialCondition& init,
                                          const std::vector<BoundSweepPoint>& points,
                                          const BoundSweepOptions& options, const NoiseStream& noise) {
  spec.validate();
  if (points.empty()) throw std::invalid_argument("bound sweep needs at least one point");
  if (options.runs == 0) throw std::invalid_argument("bound sweep needs runs >= 1");
  const std::size_t m = spec.num_gaps();
  double t_max = 0.0;
  for (const auto& p : points) {
    if (!(p.t > 0.0)) throw std::invalid_argument("sweep t must be positive");
    if (p.k > m || p.d > m || p.l < 1 || p.l > m + 1 || p.d < 1) {
      throw std::invalid_argument("sweep point indices exceed the model size");
    }
    t_max = std::max(t_max, p.t);
  }
  SimulationOptions sim;
  sim.dt = options.dt;
  sim.horizon = t_max;
  sim.sample_every = 1;

  std::vector<RunTally> tallies(options.runs);
  parallel_for(options.runs, options.workers, [&](std::size_t r) {
    const NoiseStream member = noise.child(r);
    Rng rng = member.sampling_channel();
    const std::vector<double> y0 = prefix_positions(generate_initial(init, m, rng));
    RunTally tally;
    tally.sup_hit.assign(points.size(), 0);
    tally.inf_hit.assign(points.size(), 0);
    std::vector<double> gamma_sup(points.size()), gamma_inf(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto& pt = points[p];
      gamma_sup[p] = y0[pt.k] + pt.level;
      gamma_inf[p] = y0[pt.d] - pt.level;
      BoundQuery q{pt.k, pt.l, pt.d, pt.t, gamma_sup[p], y0};
      BoundValues sup = analytic_bounds(q);
      q.gamma = gamma_inf[p];
      const BoundValues inf = analytic_bounds(q);
      sup.inf_bound = inf.inf_bound;
      sup.inf_clamped = inf.inf_clamped;
      tally.bounds.push_back(sup);
    }
    std::vector<double> scratch;
    simulate_unranked_observed(spec, y0, sim, member, [&](double time, std::span<const double> y) {
      for (std::size_t p = 0; p < points.size(); ++p) {
        const auto& pt = points[p];
        if (time > pt.t * (1.0 + 1e-12)) continue;
        if (!tally.sup_hit[p]) {
          scratch.assign(y.begin(), y.end());
          std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(pt.k),
                           scratch.end());
          if (scratch[pt.k] >= gamma_sup[p]) tally.sup_hit[p] = 1;
        }
        if (!tally.inf_hit[p]) {
          const double low = *std::min_element(y.begin() + static_cast<std::ptrdiff_t>(pt.d), y.end());
          if (low <= gamma_inf[p]) tally.inf_hit[p] = 1;
        }
      }
    });
    tallies[r] = std::move(tally);
  });

  std::vector<BoundSweepResult> out(points.size());
  const double n = static_cast<double>(options.runs);
  for (std::size_t p = 0; p < points.size(); ++p) {
    auto& res = out[p];
    res.point = points[p];
    res.runs = options.runs;
    std::size_t sup = 0, inf = 0;
    for (const auto& t : tallies) {
      sup += t.sup_hit[p];
      inf += t.inf_hit[p];
      res.bound_sup += t.bounds[p].sup_bound;
      res.bound_inf += t.bounds[p].inf_bound;
      res.clamped_sup += t.bounds[p].sup_clamped;
      res.clamped_inf += t.bounds[p].inf_clamped;
    }
    res.bound_sup /= n;
    res.bound_inf /= n;
    res.empirical_sup = static_cast<double>(sup) / n;
    res.empirical_inf = static_cast<double>(inf) / n;
    res.se_sup = std::sqrt(res.empirical_sup * (1.0 - res.empirical_sup) / n);
    res.se_inf = std::sqrt(res.empirical_inf * (1.0 - res.empirical_inf) / n);
  }
  return out;
}

bool strictly_decreasing(std::span<const double> values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

DoaReport doa_experiment(const ModelSpec& spec, const InitialCondition& init, double a_target,
                         std::size_t k, const std::vector<double>& t_grid, std::size_t ensemble_size,
                         const DoaOptions& options, const NoiseStream& noise) {
  spec.validate();
  if (!(a_target >= 0.0)) throw std::invalid_argument("a_target must be >= 0");
  if (k == 0 || k > spec.num_gaps()) throw std::invalid_argument("k must be in 1..m");
  if (ensemble_size == 0) throw std::invalid_argument("ensemble_size must be >= 1");
  if (t_grid.empty()) throw std::invalid_argument("t_grid is empty");

  SimulationOptions sim;
  sim.dt = options.dt;
  sim.horizon = t_grid.back();
  sim.solver = options.solver;
  sim.sample_every = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(
                                                    options.spacing / options.dt + 1e-9)));

  const std::size_t nh = t_grid.size();
  std::vector<OccupancyEstimate> estimates(ensemble_size);
  parallel_for(ensemble_size, options.workers, [&](std::size_t j) {
    const NoiseStream member = noise.child(j);
    Rng rng = member.sampling_channel();
    const GapVector init_gaps = generate_initial(init, spec.num_gaps(), rng);
    OccupancyRecorder rec(k, options.spacing);
    simulate_observed(spec, init_gaps, sim, member,
                      [&](const GapState& s, std::uint64_t) { rec.observe(s.time, s.gaps); });
    estimates[j] = rec.estimate(t_grid);
  });

  DoaReport rep;
  rep.a_target = a_target;
  rep.k = k;
  rep.t_grid = t_grid;
  rep.ensemble_size = ensemble_size;
  rep.thinning = estimates.front().thinning * sim.sample_every;
  rep.ks.assign(ensemble_size, std::vector<std::vector<double>>(nh, std::vector<double>(k)));
  for (std::size_t j = 0; j < ensemble_size; ++j) {
    for (std::size_t h = 0; h < nh; ++h) {
      for (std::size_t c = 0; c < k; ++c) {
        rep.ks[j][h][c] = ks_to_exponential(estimates[j].at(h, c), pi_a_rate(a_target, c + 1));
      }
    }
  }
  const double n = static_cast<double>(ensemble_size);
  std::vector<std::vector<double>> means(k, std::vector<double>(nh));
  std::vector<std::vector<double>> pooled(k, std::vector<double>(nh));
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t c = 0; c < k; ++c) {
      DoaRow row;
      row.horizon = t_grid[h];
      row.coordinate = c + 1;
      double sum = 0.0;
      for (std::size_t j = 0; j < ensemble_size; ++j) sum += rep.ks[j][h][c];
      row.ks_mean = sum / n;
      if (ensemble_size > 1) {
        double ss = 0.0;
        for (std::size_t j = 0; j < ensemble_size; ++j) {
          const double e = rep.ks[j][h][c] - row.ks_mean;
          ss += e * e;
        }
        row.ks_se = std::sqrt(ss / (n - 1.0) / n);
      }
      std::vector<double> all;
      for (std::size_t j = 0; j < ensemble_size; ++j) {
        const auto& s = estimates[j].at(h, c).sorted();
        all.insert(all.end(), s.begin(), s.end());
      }
      row.ks_pooled = ks_to_exponential(Ecdf(std::move(all)), pi_a_rate(a_target, c + 1));
      means[c][h] = row.ks_mean;
      pooled[c][h] = row.ks_pooled;
      rep.rows.push_back(row);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    rep.trend.push_back(strictly_decreasing(means[c]));
    rep.pooled_trend.push_back(strictly_decreasing(pooled[c]));
  }
  for (auto& row : rep.rows) row.trend = rep.trend[row.coordinate - 1];
  return rep;
}

}  // namespace atlas
