#include <doctest.h>

#include <cmath>
#include <vector>

#include "atlas/coupling.hpp"

using namespace atlas;

namespace {

SimulationOptions opts(double horizon, double dt) {
  SimulationOptions o;
  o.horizon = horizon;
  o.dt = dt;
  return o;
}

}  // namespace

TEST_CASE("identical copies stay identical") {
  Rng rng(1, 0, 0);
  const auto init = sample_pi_a(0.0, 12, rng);
  const auto rec = couple(ModelSpec::atlas(13), init, init, opts(2.0, 1e-3), NoiseStream(2, 0));
  for (std::size_t s = 0; s < rec.times.size(); ++s) {
    CHECK(rec.sum_delta_z[s] == 0.0);
    CHECK(rec.delta_l1[s] == 0.0);
    CHECK(rec.delta_lm[s] == 0.0);
    CHECK(rec.gaps_lower[s] == rec.gaps_upper[s]);
  }
  CHECK(rec.monotone_violation == 0.0);
  CHECK(verify_l1_identity(rec).max_defect == 0.0);
}

TEST_CASE("ordered starts stay ordered and the L1 identity holds") {
  Rng rng(2, 0, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t m = 5 + 5 * trial;
    const auto lower = sample_pi_a(0.0, m, rng);
    auto upper = lower;
    for (std::size_t i = 0; i < m; ++i) upper[i] += rng.exponential(2.0);
    const auto rec = couple(ModelSpec::atlas(m + 1), lower, upper, opts(3.0, 1e-3), NoiseStream(3, trial));
    CHECK(rec.monotone_violation < 1e-10);
    CHECK(rec.local_time_increase < 1e-10);
    const auto rep = verify_l1_identity(rec);
    CHECK(rep.max_defect < 1e-10);
    // Independent recomputation of the identity from the stored gaps and local times.
    double worst = 0.0;
    const auto path = rec.delta_path();
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
      const double dl1 = rec.local_upper[s][0] - rec.local_lower[s][0];
      const double dlm = rec.local_upper[s][m - 1] - rec.local_lower[s][m - 1];
      double sz = 0.0, sz0 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sz += rec.gaps_upper[s][i] - rec.gaps_lower[s][i];
        sz0 += rec.gaps_upper[0][i] - rec.gaps_lower[0][i];
      }
      CHECK(path.l1(s) == doctest::Approx(sz).epsilon(1e-12).scale(1.0));
      worst = std::max(worst, std::abs(sz - sz0 - 0.5 * dl1 - 0.5 * dlm));
      // Upper copy collects no more local time.
      CHECK(dl1 <= 1e-10);
      CHECK(dlm <= 1e-10);
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("drift domination") {
  const GapVector init{0.5, 0.5, 0.5, 0.5};
  const auto spec = ModelSpec::atlas(5, 1.0);
  SUBCASE("gamma = 1 reproduces the reference copy") {
    const auto rec = drift_domination_run(spec, init, 1.0, opts(1.0, 1e-3), NoiseStream(7, 0));
    for (std::size_t s = 0; s < rec.times.size(); ++s) CHECK(rec.gaps_lower[s] == rec.gaps_upper[s]);
  }
  SUBCASE("gamma > 1 is rejected") {
    CHECK_THROWS(drift_domination_run(spec, init, 1.5, opts(1.0, 1e-3), NoiseStream(7, 0)));
  }
  SUBCASE("smaller bottom drift gives larger gaps") {
    for (double gamma : {0.0, 0.5}) {
      const auto rec = drift_domination_run(spec, init, gamma, opts(2.0, 1e-3), NoiseStream(8, 0));
      CHECK(rec.monotone_violation < 1e-10);
    }
  }
  SUBCASE("without noise only the first gap moves before any collision") {
    const double gamma = 0.5, dt = 1e-3;
    const auto rec = drift_domination_run(spec, {1.0, 1.0, 1.0, 1.0}, gamma, opts(0.5, dt), NoiseStream::silent());
    for (std::size_t s = 0; s < rec.times.size(); ++s) {
      const double t = rec.times[s];
      CHECK(rec.gaps_upper[s][0] - rec.gaps_lower[s][0] == doctest::Approx((1.0 - gamma) * t).scale(1.0));
      for (std::size_t i = 1; i < 4; ++i) CHECK(rec.gaps_upper[s][i] == rec.gaps_lower[s][i]);
    }
  }
}

TEST_CASE("couple_models rejects mismatched sizes") {
  CHECK_THROWS(couple(ModelSpec::atlas(4), {1, 1, 1}, {1, 1}, opts(1.0, 1e-2), NoiseStream(1, 1)));
}
