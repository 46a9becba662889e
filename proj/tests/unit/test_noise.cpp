#include <doctest.h>

#include <cmath>
#include <vector>

#include "atlas/noise.hpp"

using namespace atlas;

TEST_CASE("identical seed and stream replay identical increments") {
  IncrementSource a(NoiseStream(42, 7), 5), b(NoiseStream(42, 7), 5);
  std::vector<double> x(5), y(5);
  for (int s = 0; s < 100; ++s) {
    a.next(x, 0.1);
    b.next(y, 0.1);
    CHECK(x == y);
  }
  CHECK(a.position() == 100);
}

TEST_CASE("rank channels do not depend on how many ranks are drawn") {
  IncrementSource small(NoiseStream(9, 1), 3), big(NoiseStream(9, 1), 8);
  std::vector<double> x(3), y(8);
  for (int s = 0; s < 50; ++s) {
    small.next(x, 1.0);
    big.next(y, 1.0);
    for (int r = 0; r < 3; ++r) CHECK(x[r] == y[r]);
  }
}

TEST_CASE("different stream ids and children give different draws") {
  Rng a = NoiseStream(1, 0).rank_channel(0);
  Rng b = NoiseStream(1, 1).rank_channel(0);
  Rng c = NoiseStream(1, 0).child(0).rank_channel(0);
  const double xa = a.gaussian(), xb = b.gaussian(), xc = c.gaussian();
  CHECK(xa != xb);
  CHECK(xa != xc);
  CHECK(NoiseStream(1, 0).child(3).stream_id() == NoiseStream(1, 0).child(3).stream_id());
  CHECK(NoiseStream(1, 0).child(3).stream_id() != NoiseStream(1, 0).child(4).stream_id());
}

TEST_CASE("silent stream yields zeros") {
  IncrementSource s(NoiseStream::silent(), 4);
  std::vector<double> x(4, 1.0);
  s.next(x, 1.0);
  for (double v : x) CHECK(v == 0.0);
  CHECK(NoiseStream::silent().child(2).is_silent());
}

TEST_CASE("uniform and exponential draws") {
  Rng rng(3, 3, 3);
  const int n = 100000;
  double su = 0.0, se = 0.0, sg = 0.0, sg2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double e = rng.exponential(4.0);
    REQUIRE(e >= 0.0);
    se += e;
    const double g = rng.gaussian();
    sg += g;
    sg2 += g * g;
  }
  // 4-sigma bands around the population moments.
  CHECK(std::abs(su / n - 0.5) <= 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(se / n - 0.25) <= 4.0 * 0.25 / std::sqrt(n));
  CHECK(std::abs(sg / n) <= 4.0 / std::sqrt(n));
  CHECK(std::abs(sg2 / n - 1.0) <= 4.0 * std::sqrt(2.0 / n));
  CHECK_THROWS_AS(rng.exponential(0.0), std::invalid_argument);
}
