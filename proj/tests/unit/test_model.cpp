#include <doctest.h>

#include <cmath>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/reflect.hpp"
#include "oracles.hpp"

using namespace atlas;

TEST_CASE("atlas preset") {
  const auto s = ModelSpec::atlas(4, 0.7);
  CHECK(s.rank_drifts == std::vector<double>{0.7, 0.0, 0.0, 0.0});
  CHECK(s.rank_diffusions == std::vector<double>(4, 1.0));
  CHECK(s.num_gaps() == 3);
  CHECK_THROWS(ModelSpec::atlas(1).validate());
  auto bad = ModelSpec::atlas(3);
  bad.rank_diffusions[1] = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("stationary rate formulas") {
  CHECK(1.0 / pi_a_rate(0.0, 5) == doctest::Approx(0.5));
  CHECK(1.0 / pi_a_rate(2.0, 3) == doctest::Approx(1.0 / 8.0));
  CHECK(1.0 / pi_finite_rate(3, 2) == doctest::Approx(1.0));
  CHECK(1.0 / pi_finite_rate(3, 3) == doctest::Approx(2.0));
  CHECK(1.0 / pi_a_finite_rate(1.0, 3, 1) == doctest::Approx(0.44444).epsilon(1e-4));
  CHECK(1.0 / pi_a_finite_rate(1.0, 3, 3) == doctest::Approx(0.8));
  CHECK(pi_finite_rate(100000, 1) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(pi_a_finite_rate(0.0, 7, 4) == doctest::Approx(pi_finite_rate(7, 4)));
}

TEST_CASE("product-form rates of the finite atlas model match the closed form") {
  for (std::size_t d : {1u, 3u, 10u, 40u}) {
    const auto rates = stationary_gap_rates(ModelSpec::atlas(d + 1));
    for (std::size_t i = 1; i <= d; ++i) CHECK(rates[i - 1] == doctest::Approx(2.0 * (1.0 - double(i) / (d + 1))));
  }
  // Oracle: solve R lambda = -mu directly.
  ModelSpec g;
  g.num_particles = 5;
  g.rank_drifts = {1.3, 0.2, -0.1, -0.4, -0.6};
  g.rank_diffusions.assign(5, 1.0);
  const auto rates = stationary_gap_rates(g);
  Eigen::VectorXd mu(4);
  for (int i = 0; i < 4; ++i) mu(i) = g.rank_drifts[i + 1] - g.rank_drifts[i];
  const Eigen::VectorXd lam = oracle::tridiag(4).fullPivLu().solve(-mu);
  for (int i = 0; i < 4; ++i) CHECK(rates[i] == doctest::Approx(lam(i)).epsilon(1e-12));
}

TEST_CASE("sample_pi_a means within 4 standard errors") {
  Rng rng(11, 0, 0);
  const std::size_t n = 100000, m = 4;
  const double a = 1.5;
  std::vector<double> sum(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto g = sample_pi_a(a, m, rng);
    for (std::size_t i = 0; i < m; ++i) sum[i] += g[i];
  }
  for (std::size_t i = 1; i <= m; ++i) {
    const double mean = 1.0 / (2.0 + i * a);
    CHECK(std::abs(sum[i - 1] / n - mean) <= 4.0 * mean / std::sqrt(double(n)));
  }
  CHECK_THROWS(sample_pi_a(-0.1, 3, rng));
  CHECK_THROWS(sample_pi_a(0.0, 0, rng));
  CHECK_THROWS(sample_pi_a_finite(0.0, 3, rng));
}

TEST_CASE("sample_pi_finite and sample_pi_a_finite means") {
  Rng rng(12, 0, 0);
  const std::size_t n = 100000;
  std::vector<double> s1(3, 0.0), s2(3, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto g = sample_pi_finite(3, rng);
    const auto h = sample_pi_a_finite(1.0, 3, rng);
    for (int i = 0; i < 3; ++i) {
      s1[i] += g[i];
      s2[i] += h[i];
    }
  }
  const double t1[] = {2.0 / 3.0, 1.0, 2.0};
  const double t2[] = {4.0 / 9.0, 0.5, 0.8};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(s1[i] / n - t1[i]) <= 4.0 * t1[i] / std::sqrt(double(n)));
    CHECK(std::abs(s2[i] / n - t2[i]) <= 4.0 * t2[i] / std::sqrt(double(n)));
  }
}

TEST_CASE("deterministic initial conditions") {
  Rng rng(1, 1, 1);
  CHECK(adversarial_block_value(1) == 1.0);
  CHECK(adversarial_block_value(8) == 2.0);
  CHECK(adversarial_block_value(27) == 3.0);
  CHECK(adversarial_block_value(10) == doctest::Approx(0.21544).epsilon(1e-4));
  InitialCondition blocks;
  blocks.kind = InitialCondition::AdversarialBlocks{};
  const auto g = generate_initial(blocks, 64, rng);
  CHECK(g[63] == 4.0);
  CHECK(g[1] == doctest::Approx(std::pow(2.0, -2.0 / 3.0)));

  InitialCondition ex;
  ex.kind = InitialCondition::Explicit{{0.1, 0.2}};
  CHECK(generate_initial(ex, 2, rng) == GapVector{0.1, 0.2});
  CHECK_THROWS(generate_initial(ex, 3, rng));
  ex.kind = InitialCondition::Explicit{{0.1, -0.2}};
  CHECK_THROWS(generate_initial(ex, 2, rng));
}

TEST_CASE("perturbed_exp validation") {
  Rng rng(2, 2, 2);
  InitialCondition ic;
  InitialCondition::PerturbedExp p;
  p.a = 1.0;
  p.lambda.kind = LambdaSequence::Kind::constant;
  p.lambda.scale = -2.95;  // rate at i=1 is 0.05 > 0 but below (1 - 0.9) * 3
  ic.kind = p;
  CHECK_THROWS(generate_initial(ic, 3, rng));
  p.lambda.scale = -3.5;  // non-positive rate
  ic.kind = p;
  CHECK_THROWS(generate_initial(ic, 3, rng));
  p.lambda.scale = 0.5;
  ic.kind = p;
  const auto g = generate_initial(ic, 5, rng);
  for (double x : g) CHECK(x >= 0.0);
  p.beta = 1.0;
  ic.kind = p;
  CHECK_THROWS(generate_initial(ic, 3, rng));
}

TEST_CASE("pointwise_min is below both constituents drawn from the same stream") {
  InitialCondition a, b;
  a.kind = InitialCondition::StationaryPiA{0.0};
  b.kind = InitialCondition::DominatingExp{1.0};
  const auto mn = InitialCondition::pointwise_min(a, b);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng r1(s, 5, 5), r2(s, 5, 5);
    const auto m = generate_initial(mn, 20, r1);
    const auto x = generate_initial(a, 20, r2);
    const auto y = generate_initial(b, 20, r2);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(m[i] == std::min(x[i], y[i]));
      CHECK(m[i] <= x[i]);
      CHECK(m[i] <= y[i]);
    }
  }
  CHECK(mn.name() == "pointwise_min");
}

TEST_CASE("scaled_iid gaps are lambda times theta") {
  InitialCondition ic;
  InitialCondition::ScaledIid k;
  k.lambda.kind = LambdaSequence::Kind::power;
  k.lambda.scale = 2.0;
  k.lambda.exponent = 1.0;
  k.theta = ThetaLaw::constant;
  ic.kind = k;
  Rng rng(0, 0, 0);
  const auto g = generate_initial(ic, 4, rng);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] / (2.0 * (i + 1)) == doctest::Approx(g[0] / 2.0));
}

TEST_CASE("prefix positions") {
  CHECK(prefix_positions({1, 2, 3}) == std::vector<double>{0, 1, 3, 6});
  CHECK(prefix_positions({0, 0}) == std::vector<double>{0, 0, 0});
  CHECK(prefix_positions({0.5}) == std::vector<double>{0, 0.5});
  Rng rng(4, 4, 4);
  const auto g = sample_pi_a(0.0, 100, rng);
  const auto p = prefix_positions(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(p[i + 1] >= p[i]);
    std::vector<double> head(g.begin(), g.begin() + i + 1);
    CHECK(p[i + 1] == doctest::Approx(oracle::exact_sum(head)).epsilon(1e-14));
  }
}

TEST_CASE("condition diagnostics against naive high-precision sums") {
  using oracle::Big;
  SUBCASE("identical vectors") {
    GapVector u(50, 0.3);
    ConditionOptions o;
    o.which = kStarA;
    const auto d = check_conditions(u, u, {3, 10, 50}, o);
    for (double v : d.series("stara_l1")) CHECK(v == 0.0);
  }
  SUBCASE("constant half, d = 100") {
    GapVector u(100, 0.5);
    ConditionOptions o;
    const auto d = check_conditions(u, u, {100}, o);
    CHECK(d.series("star")[0] == doctest::Approx(1.0857).epsilon(1e-4));
    CHECK(d.series("star")[0] == doctest::Approx(50.0 / (10.0 * std::log(100.0))).epsilon(1e-14));
  }
  SUBCASE("adversarial blocks against a pi draw") {
    const std::size_t n = 10000;
    Rng rng(8, 8, 8);
    GapVector u(n), v = sample_pi_a(0.0, n, rng);
    for (std::size_t i = 0; i < n; ++i) u[i] = adversarial_block_value(i + 1);
    ConditionOptions o;
    o.which = kStar | kStarA | kDjo;
    o.beta = 0.5;
    const std::vector<std::size_t> grid{3, 10, 100, 1000, 10000};
    const auto d = check_conditions(u, v, grid, o);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      Big mins = 0, absd = 0, su = 0, nl = 0;
      for (std::size_t i = 0; i < grid[g]; ++i) {
        mins += Big(std::min(u[i], v[i]));
        absd += Big(std::abs(v[i] - u[i]));
        su += Big(u[i]);
        nl += Big(std::max(0.0, -std::log(u[i])));
      }
      const double dd = double(grid[g]);
      const double star = mins.convert_to<double>() / (std::sqrt(dd) * std::log(dd));
      const double l1 = std::log(std::log(dd)) / std::log(dd) * absd.convert_to<double>();
      const double scale = std::pow(dd, 0.5) * std::log(dd);
      CHECK(d.series("star")[g] == doctest::Approx(star).epsilon(1e-12));
      CHECK(d.series("stara_l1")[g] == doctest::Approx(l1).epsilon(1e-12));
      CHECK(d.series("stara_ratio")[g] == doctest::Approx(u[grid[g] - 1] / (dd * v[grid[g] - 1])).epsilon(1e-12));
      CHECK(d.series("d1")[g] == doctest::Approx(su.convert_to<double>() / scale).epsilon(1e-12));
      CHECK(d.series("d2")[g] == doctest::Approx(nl.convert_to<double>() / scale).epsilon(1e-12));
      CHECK(d.series("d3")[g] ==
            doctest::Approx(su.convert_to<double>() / (std::pow(dd, 0.25 / 1.5) * std::log(dd))).epsilon(1e-12));
    }
  }
  SUBCASE("grid errors") {
    GapVector u(10, 1.0);
    ConditionOptions o;
    CHECK_THROWS(check_conditions(u, u, {3, 11}, o));
    CHECK_THROWS(check_conditions(u, u, {2}, o));
    CHECK_THROWS(check_conditions(u, u, {5, 4}, o));
  }
}
