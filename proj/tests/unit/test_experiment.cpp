#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "atlas/config.hpp"
#include "atlas/experiment.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  auto cfg = parse_config(in);
  validate_config(cfg);
  return cfg;
}

fs::path fresh(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("atlas_exp_" + name);
  fs::remove_all(p);
  fs::remove_all(p.string() + ".partial");
  return p;
}

const char* kSmallCoupling = R"(
[experiment]
kind = coupling
seed = 3
[model]
particles = 6
dt = 1e-3
horizon = 0.5
sample_every = 50
[initial]
kind = stationary_pi_a
[coupling]
upper = shift
shift_index = 2
runs = 2
)";

}  // namespace

TEST_CASE("alt model step drifts") {
  const auto s = alt_model_step_config(3, 1.0);
  REQUIRE(s.num_particles == 4);
  CHECK(s.rank_drifts[0] == doctest::Approx(0.75));
  CHECK(s.rank_drifts[1] == doctest::Approx(-0.25));
  CHECK(s.rank_drifts[2] == doctest::Approx(-0.5));
  CHECK(s.rank_drifts[3] == doctest::Approx(-0.75));
  double total = 0.0;
  for (double a : s.rank_drifts) total += a;
  CHECK(total / 4.0 == doctest::Approx(-0.1875));
  CHECK_THROWS(alt_model_step_config(0, 1.0));
  CHECK_THROWS(alt_model_step_config(3, 0.0));
}

TEST_CASE("truncation heuristic") {
  CHECK(truncation_heuristic(1, 100.0) == 100);
  CHECK(truncation_heuristic(50, 100.0) == 200);
  CHECK(truncation_heuristic(1, 2.0) == 15);
}

TEST_CASE("runs are byte-identical for the same config and seed") {
  auto cfg = parse(kSmallCoupling);
  const auto a = fresh("det_a"), b = fresh("det_b");
  execute(cfg, a);
  cfg.workers = 2;
  execute(cfg, b);
  for (const char* f : {"coupled_0.csv", "coupled_1.csv", "initial_lower.csv", "summary.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(fs::exists(a / kResolvedConfigFile));
  CHECK_FALSE(fs::exists(a.string() + ".partial"));
  CHECK(slurp(a / "coupled_0.csv").rfind("time,sum_dz,dl1,dlm,violation\n", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("a failing run leaves nothing behind") {
  auto cfg = parse(kSmallCoupling);
  cfg.model.solver_max_iterations = 1;
  cfg.model.solver_tolerance = 1e-300;
  cfg.initial.kind = InitialCondition::Explicit{GapVector(5, 0.0)};
  const auto out = fresh("fail");
  CHECK_THROWS_AS(execute(cfg, out), SolverError);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(out.string() + ".partial"));
}

TEST_CASE("doubling check flags a short truncation") {
  auto cfg = parse(R"(
[experiment]
kind = stationarity
seed = 2
[model]
particles = 4
dt = 1e-3
horizon = 2
[initial]
kind = stationary_pi_a
)");
  const auto rep = truncation_doubling_check(cfg, 1);
  CHECK(rep.m == 3);
  CHECK(rep.flagged);
}
