#include <doctest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "atlas/excursion.hpp"

using namespace atlas;

namespace {

DeltaPath make_path(const std::vector<std::vector<double>>& rows, double dt = 1.0) {
  DeltaPath p;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    p.times.push_back(dt * s);
    p.values.push_back(rows[s]);
  }
  return p;
}

// Straight-line reading of the definitions: scan forward sample by sample.
struct NaiveResult {
  std::vector<double> sigma;
  std::size_t n_t = 0;
  std::vector<double> decrements;
};

NaiveResult naive_excursions(const DeltaPath& p, std::size_t k, double eps, double thr) {
  NaiveResult r;
  std::size_t s = 0;
  const std::size_t n = p.times.size();
  while (true) {
    while (s < n && p.values[s][k - 1] < eps) ++s;
    if (s >= n) return r;
    const std::size_t open = s;
    r.sigma.push_back(p.times[open]);
    ++r.n_t;
    std::size_t cur = open;
    for (std::size_t j = 1; j <= k; ++j) {
      while (cur < n && p.values[cur][k - j] > thr) ++cur;
      if (cur >= n) return r;
    }
    while (cur < n && p.values[cur][k - 1] > thr) ++cur;
    if (cur >= n) return r;
    r.sigma.push_back(p.times[cur]);
    double l_open = 0.0, l_close = 0.0;
    for (double v : p.values[open]) l_open += v;
    for (double v : p.values[cur]) l_close += v;
    r.decrements.push_back(l_close - l_open);
    s = cur;
  }
}

}  // namespace

TEST_CASE("identically zero difference") {
  const auto p = make_path(std::vector<std::vector<double>>(20, {0.0, 0.0, 0.0}));
  for (double s : {0.0, 3.0, 19.0}) CHECK(t_chain(p, 3, s) == std::vector<double>{s, s, s});
  const auto rec = detect_excursions(p, 2, 0.1, 19.0);
  CHECK(rec.n_t == 0);
  CHECK(rec.sigma_times.empty());
  CHECK(rec.completed() == 0);
  CHECK_THROWS(t_chain(p, 3, 25.0));
}

TEST_CASE("constructed chain") {
  // Coordinates (dZ1, dZ2). dZ2 rises at t=1, dZ1 vanishes at t=3, dZ2 returns at t=4.
  const auto p = make_path({{0.5, 0.0},
                            {0.5, 0.3},
                            {0.2, 0.3},
                            {0.0, 0.2},
                            {0.0, 0.0},
                            {0.1, 0.5},
                            {0.1, 0.4}});
  CHECK(t_chain(p, 2, 1.0) == std::vector<double>{4.0, 4.0});
  CHECK(t_chain(p, 1, 0.0) == std::vector<double>{3.0});
  const auto rec = detect_excursions(p, 2, 0.25, 6.0);
  REQUIRE(rec.sigma_times.size() == 3);
  CHECK(rec.opening(0) == 1.0);
  CHECK(rec.closing(0) == 4.0);
  CHECK(rec.opening(1) == 5.0);
  CHECK(rec.n_t == 2);
  REQUIRE(rec.completed() == 1);
  CHECK(rec.decrements[0] == doctest::Approx(0.0 - 0.8));
  CHECK(rec.lengths() == std::vector<double>{3.0});
  CHECK(rec.t_chains[1] == std::vector<double>{kNever, kNever});

  const auto cut = detect_excursions(p, 2, 0.25, 3.0);
  CHECK(cut.n_t == 1);
  CHECK(cut.completed() == 0);
}

TEST_CASE("chain waits for the lower coordinates in order") {
  // dZ2 hits zero at t=1, then dZ1 at t=2; the closing return of dZ2 must come later still.
  const auto p = make_path({{0.4, 0.4}, {0.4, 0.0}, {0.0, 0.3}, {0.0, 0.3}, {0.0, 0.0}});
  CHECK(t_chain(p, 2, 0.0) == std::vector<double>{1.0, 2.0});
  const auto rec = detect_excursions(p, 2, 0.1, 10.0);
  REQUIRE(rec.completed() == 1);
  CHECK(rec.closing(0) == 4.0);
}

TEST_CASE("detection agrees with a naive scan on random paths") {
  Rng rng(5, 0, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const std::size_t n = 50 + trial;
    std::vector<std::vector<double>> rows(n, std::vector<double>(k + 1));
    for (auto& r : rows) {
      for (auto& v : r) v = rng.uniform() < 0.35 ? 0.0 : rng.exponential(4.0);
    }
    const auto p = make_path(rows, 0.01);
    const double eps = 0.2;
    const auto fast = detect_excursions(p, k, eps, 1e9);
    const auto slow = naive_excursions(p, k, eps, kDefaultZeroThreshold);
    CHECK(fast.sigma_times == slow.sigma);
    CHECK(fast.n_t == slow.n_t);
    REQUIRE(fast.decrements.size() == slow.decrements.size());
    for (std::size_t j = 0; j < fast.decrements.size(); ++j) {
      CHECK(fast.decrements[j] == doctest::Approx(slow.decrements[j]).scale(1.0));
    }
  }
}

TEST_CASE("length threshold and time floor") {
  CHECK(excursion_length_threshold(1.0, 1, std::numbers::e) == doctest::Approx(192.0));
  CHECK(excursion_length_threshold(2.0, 2, 100.0) == doctest::Approx(48.0 * 4 * 2 * 9 * std::log(100.0)));
  for (double d : {0.5, 1.0, 2.0}) {
    for (std::size_t k : {1u, 2u, 3u}) {
      const double t = excursion_time_floor(d, k);
      const double c = excursion_length_threshold(d, k, std::numbers::e);
      CHECK(t == doctest::Approx(c * std::log(t)).epsilon(1e-10));
      // Past the floor the threshold stays below the horizon.
      for (double f : {1.01, 2.0, 10.0}) CHECK(excursion_length_threshold(d, k, f * t) <= f * t);
      CHECK(excursion_length_threshold(d, k, 0.9 * t) > 0.9 * t);
    }
  }
  CHECK(excursion_time_floor(2.0, 2) == doctest::Approx(36285.0).epsilon(1e-4));
}

TEST_CASE("tail stats") {
  std::vector<ExcursionRecord> none;
  const auto empty = excursion_tail_stats(none, 1.0, 1, 100.0);
  CHECK(empty.excursion_fraction == 0.0);
  CHECK(empty.runs == 0);

  std::vector<ExcursionRecord> recs(4);
  for (auto& r : recs) {
    r.k = 1;
    r.horizon = 100.0;
  }
  recs[0].sigma_times = {1.0, 2.0};
  recs[0].decrements = {-0.1};
  recs[0].n_t = 1;
  recs[1].sigma_times = {1.0, 2.0, 3.0};
  recs[1].decrements = {-0.1};
  recs[1].n_t = 2;
  const auto rep = excursion_tail_stats(recs, 1.0, 1, 100.0);
  CHECK(rep.runs == 4);
  CHECK(rep.completed == 2);
  CHECK(rep.censored == 1);
  CHECK(rep.long_completed == 0);
  CHECK(rep.max_n_t == 2);
  CHECK(rep.prob_nt_exceeds == 0.0);
  CHECK(rep.bound == doctest::Approx(5.0 * 1 * 2 / 1e4));
  CHECK_FALSE(rep.horizon_meets_floor);
}
