#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "atlas/config.hpp"
#include "atlas/io.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("atlas_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kPi = "[experiment]\nkind = coupling\n[initial]\nkind = stationary_pi_a\n";

const char* kCoupling = R"(
[experiment]
kind = coupling
seed = 17   ; trailing comment
workers = 2

[model]
family = atlas
particles = 9
gamma = 0.75
dt = 1e-3
horizon = 2

[initial]
kind = pointwise_min
first = pi
second = dom

[pi]
kind = stationary_pi_a
a = 0.5

[dom]
kind = dominating_exp
rate = 1.5

[coupling]
upper = scale
factor = 3
upper_gamma = 0.25
runs = 3

[analysis]
k = 2
epsilon = 0.2
)";

}  // namespace

TEST_CASE("format_double uses 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  for (double x : {M_PI, 1e-300, -2.5e17, 1.0 / 3.0}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("initial csv round trip") {
  const auto dir = scratch("csv");
  const GapVector g{0.1, 1.0 / 3.0, 0.0, 7e-12};
  write_initial_csv(dir / "init.csv", g);
  CHECK(read_initial_csv(dir / "init.csv") == g);
  std::ifstream in(dir / "init.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,gap");
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "index,gap\n2,0.5\n";
  }
  CHECK_THROWS(read_initial_csv(dir / "bad.csv"));
  fs::remove_all(dir);
}

TEST_CASE("parse, render and parse again") {
  const auto cfg = parse(kCoupling);
  CHECK(cfg.kind == ExperimentKind::coupling);
  CHECK(cfg.seed == 17);
  CHECK(cfg.workers == 2);
  CHECK(cfg.model.particles == 9);
  CHECK(cfg.model.gamma == 0.75);
  CHECK(cfg.initial.name() == "pointwise_min");
  CHECK(cfg.coupling.upper == "scale");
  CHECK(cfg.coupling.factor == 3.0);
  REQUIRE(cfg.coupling.upper_gamma.has_value());
  CHECK(*cfg.coupling.upper_gamma == 0.25);
  CHECK(cfg.analysis.k == 2);
  validate_config(cfg);

  const std::string text = render_config(cfg);
  const auto again = parse(text);
  CHECK(render_config(again) == text);
  CHECK(again.initial.name() == "pointwise_min");
  CHECK(again.analysis.epsilon == 0.2);

  // The min of the two constituents is reproduced after the round trip.
  Rng r1(1, 1, 1), r2(1, 1, 1);
  CHECK(generate_initial(cfg.initial, 8, r1) == generate_initial(again.initial, 8, r2));
}

TEST_CASE("every shipped config validates and round-trips") {
  for (const auto& e : fs::directory_iterator(ATLAS_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    CAPTURE(e.path().string());
    const auto cfg = load_config(e.path());
    validate_config(cfg);
    const std::string text = render_config(cfg);
    CHECK(render_config(parse(text)) == text);
  }
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[experiment]\nkind = nonsense\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nkind = coupling\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nkind = coupling\n[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nkind = coupling\n[model]\nparticles = many\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nkind = bounds\n[bounds]\npoints = 1:2:3\n"), ConfigError);
  CHECK_THROWS_AS(parse("[experiment]\nkind = coupling\n[initial]\nkind = pointwise_min\nfirst = x\n"),
                  ConfigError);
  auto check = [](const std::string& text) { validate_config(parse(text)); };
  CHECK_THROWS_AS(check(std::string(kPi) + "[model]\nparticles = 1\n"), ConfigError);
  CHECK_THROWS_AS(check(std::string(kPi) + "[model]\ndt = -1\n"), ConfigError);
  CHECK_THROWS_AS(check(std::string(kPi) + "[coupling]\nupper_gamma = 2\n"), ConfigError);
  CHECK_THROWS_AS(
      check("[experiment]\nkind = coupling\n[model]\nparticles = 4\n[initial]\nkind = explicit\ngaps = 1 2\n"),
      ConfigError);
  CHECK_NOTHROW(check(kPi));
  CHECK_THROWS_AS(parse("[experiment]\nkind = coupling\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/atlas.ini"), ConfigError);
}

TEST_CASE("explicit initial gaps from a file resolve against the config directory") {
  const auto dir = scratch("explicit");
  write_initial_csv(dir / "start.csv", {0.5, 0.25, 2.0});
  {
    std::ofstream out(dir / "run.ini");
    out << "[experiment]\nkind = stationarity\n[model]\nparticles = 4\n[initial]\nkind = explicit\nfile = start.csv\n";
  }
  const auto cfg = load_config(dir / "run.ini");
  validate_config(cfg);
  Rng rng(0, 0, 0);
  CHECK(generate_initial(cfg.initial, 3, rng) == GapVector{0.5, 0.25, 2.0});
  fs::remove_all(dir);
}
