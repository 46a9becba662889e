// Python module _core: thin wrappers over the C++ library. Arrays come back as numpy.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "atlas/config.hpp"
#include "atlas/coupling.hpp"
#include "atlas/excursion.hpp"
#include "atlas/experiment.hpp"
#include "atlas/reflect.hpp"
#include "atlas/stats.hpp"

namespace py = pybind11;
using namespace atlas;

namespace {

py::array_t<double> matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  py::array_t<double> out({rows.size(), cols});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) v(r, c) = rows[r][c];
  }
  return out;
}

SimulationOptions sim_options(double horizon, double dt, std::uint64_t sample_every, double tolerance) {
  SimulationOptions o;
  o.horizon = horizon;
  o.dt = dt;
  o.sample_every = sample_every;
  o.solver.tolerance = tolerance;
  return o;
}

NoiseStream stream(std::uint64_t seed, std::uint64_t stream_id) { return NoiseStream(seed, stream_id); }

py::dict trajectory_dict(const Trajectory& tr, std::size_t m) {
  std::vector<double> times, bottom;
  std::vector<std::vector<double>> gaps, local;
  for (const auto& s : tr.snapshots) {
    times.push_back(s.time);
    bottom.push_back(s.bottom_position);
    gaps.push_back(s.gaps);
    local.push_back(s.cum_local_times);
  }
  py::dict d;
  d["time"] = py::array_t<double>(times.size(), times.data());
  d["gaps"] = matrix(gaps, m);
  d["local_times"] = matrix(local, m);
  d["bottom"] = py::array_t<double>(bottom.size(), bottom.data());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Monte Carlo lab for truncated Atlas and rank-based diffusions";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError", PyExc_ArithmeticError);
  py::register_exception<SolverError>(mod, "SolverError", PyExc_ArithmeticError);

  py::class_<ModelSpec>(mod, "ModelSpec")
      .def(py::init([](std::vector<double> drifts, std::vector<double> diffusions) {
             ModelSpec s;
             s.num_particles = drifts.size();
             if (diffusions.empty()) diffusions.assign(drifts.size(), 1.0);
             s.rank_drifts = std::move(drifts);
             s.rank_diffusions = std::move(diffusions);
             s.validate();
             return s;
           }),
           py::arg("drifts"), py::arg("diffusions") = std::vector<double>{})
      .def_static("atlas", &ModelSpec::atlas, py::arg("particles"), py::arg("gamma") = 1.0)
      .def_static("alt", &alt_model_step_config, py::arg("d"), py::arg("a"))
      .def_readonly("num_particles", &ModelSpec::num_particles)
      .def_readonly("rank_drifts", &ModelSpec::rank_drifts)
      .def_readonly("rank_diffusions", &ModelSpec::rank_diffusions)
      .def("num_gaps", &ModelSpec::num_gaps)
      .def("stationary_gap_rates", [](const ModelSpec& s) { return stationary_gap_rates(s); });

  mod.def("pi_a_rate", &pi_a_rate, py::arg("a"), py::arg("i"));
  mod.def("pi_finite_rate", &pi_finite_rate, py::arg("d"), py::arg("i"));
  mod.def("pi_a_finite_rate", &pi_a_finite_rate, py::arg("a"), py::arg("d"), py::arg("i"));
  mod.def(
      "sample_pi_a",
      [](double a, std::size_t m, std::uint64_t seed) {
        Rng rng = NoiseStream(seed, 0).sampling_channel();
        return sample_pi_a(a, m, rng);
      },
      py::arg("a"), py::arg("m"), py::arg("seed"));
  mod.def("prefix_positions", &prefix_positions, py::arg("gaps"));

  mod.def("reflection_matrix", &reflection_matrix, py::arg("m"));
  mod.def("reflection_matrix_inverse", &reflection_matrix_inverse, py::arg("m"));
  mod.def(
      "solve_skorokhod",
      [](std::vector<double> tentative, double tolerance, int max_iterations) {
        const auto r = solve_skorokhod(tentative, tolerance, max_iterations);
        py::dict d;
        d["new_gaps"] = r.new_gaps;
        d["local_time_increments"] = r.local_time_increments;
        d["iterations"] = r.iterations;
        d["residual"] = r.residual;
        return d;
      },
      py::arg("tentative"), py::arg("tolerance") = 1e-12, py::arg("max_iterations") = 0);

  mod.def(
      "simulate",
      [](const ModelSpec& spec, const std::vector<double>& init, double horizon, double dt,
         std::uint64_t sample_every, std::uint64_t seed, std::uint64_t stream_id, double tolerance) {
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = simulate(spec, init, sim_options(horizon, dt, sample_every, tolerance), stream(seed, stream_id));
        }
        return trajectory_dict(tr, spec.num_gaps());
      },
      py::arg("spec"), py::arg("init"), py::arg("horizon"), py::arg("dt") = 1e-3, py::arg("sample_every") = 1,
      py::arg("seed") = 1, py::arg("stream_id") = 0, py::arg("tolerance") = 1e-12);

  mod.def(
      "couple",
      [](const ModelSpec& spec, const std::vector<double>& lower, const std::vector<double>& upper, double horizon,
         double dt, std::uint64_t sample_every, std::uint64_t seed, std::uint64_t stream_id) {
        CoupledRecord rec;
        {
          py::gil_scoped_release release;
          rec = couple(spec, lower, upper, sim_options(horizon, dt, sample_every, 1e-12), stream(seed, stream_id));
        }
        const std::size_t m = rec.num_gaps();
        py::dict d;
        d["time"] = py::array_t<double>(rec.times.size(), rec.times.data());
        d["gaps_lower"] = matrix(rec.gaps_lower, m);
        d["gaps_upper"] = matrix(rec.gaps_upper, m);
        d["sum_dz"] = py::array_t<double>(rec.sum_delta_z.size(), rec.sum_delta_z.data());
        d["dl1"] = py::array_t<double>(rec.delta_l1.size(), rec.delta_l1.data());
        d["dlm"] = py::array_t<double>(rec.delta_lm.size(), rec.delta_lm.data());
        d["monotone_violation"] = rec.monotone_violation;
        d["l1_defect"] = verify_l1_identity(rec).max_defect;
        return d;
      },
      py::arg("spec"), py::arg("lower"), py::arg("upper"), py::arg("horizon"), py::arg("dt") = 1e-3,
      py::arg("sample_every") = 1, py::arg("seed") = 1, py::arg("stream_id") = 0);

  mod.def(
      "detect_excursions",
      [](const std::vector<double>& times, py::array_t<double, py::array::c_style | py::array::forcecast> delta,
         std::size_t k, double epsilon, double zero_threshold) {
        if (delta.ndim() != 2 || static_cast<std::size_t>(delta.shape(0)) != times.size()) {
          throw std::invalid_argument("delta must have shape (len(times), m)");
        }
        DeltaPath path;
        path.times = times;
        const auto v = delta.unchecked<2>();
        for (py::ssize_t s = 0; s < delta.shape(0); ++s) {
          GapVector row(static_cast<std::size_t>(delta.shape(1)));
          for (py::ssize_t c = 0; c < delta.shape(1); ++c) row[static_cast<std::size_t>(c)] = v(s, c);
          path.values.push_back(std::move(row));
        }
        const double horizon = times.empty() ? 0.0 : times.back();
        const auto rec = detect_excursions(path, k, epsilon, horizon, zero_threshold);
        py::dict d;
        d["sigma"] = rec.sigma_times;
        d["chains"] = rec.t_chains;
        d["n_t"] = rec.n_t;
        d["decrements"] = rec.decrements;
        d["lengths"] = rec.lengths();
        return d;
      },
      py::arg("times"), py::arg("delta"), py::arg("k"), py::arg("epsilon") = 0.1,
      py::arg("zero_threshold") = kDefaultZeroThreshold);
  mod.def("excursion_length_threshold", &excursion_length_threshold, py::arg("domination"), py::arg("k"),
          py::arg("horizon"));
  mod.def("excursion_time_floor", &excursion_time_floor, py::arg("domination"), py::arg("k"));

  mod.def(
      "ks_to_exponential", [](std::vector<double> s, double rate) { return ks_to_exponential(Ecdf(std::move(s)), rate); },
      py::arg("samples"), py::arg("rate"));
  mod.def(
      "ks_two_sample",
      [](std::vector<double> a, std::vector<double> b) { return ks_two_sample(Ecdf(std::move(a)), Ecdf(std::move(b))); },
      py::arg("a"), py::arg("b"));
  mod.def("ks_critical_value", &ks_critical_value, py::arg("alpha"), py::arg("n"), py::arg("m"));
  mod.def("normal_tail", &normal_tail, py::arg("x"));
  mod.def(
      "analytic_bounds",
      [](std::size_t k, std::size_t l, std::size_t d, double t, double gamma, std::vector<double> positions) {
        BoundQuery q{k, l, d, t, gamma, std::move(positions)};
        const auto b = analytic_bounds(q);
        py::dict out;
        out["sup"] = b.sup_bound;
        out["inf"] = b.inf_bound;
        out["sup_clamped"] = b.sup_clamped;
        out["inf_clamped"] = b.inf_clamped;
        return out;
      },
      py::arg("k"), py::arg("l"), py::arg("d"), py::arg("t"), py::arg("gamma"), py::arg("positions"));

  mod.def(
      "render_config",
      [](const std::filesystem::path& path) {
        const auto cfg = load_config(path);
        validate_config(cfg);
        return render_config(cfg);
      },
      py::arg("path"));
  mod.def(
      "run",
      [](const std::filesystem::path& config_path, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> workers, bool doubling_check) {
        auto cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        validate_config(cfg);
        std::string text;
        {
          py::gil_scoped_release release;
          text = execute(cfg, out, doubling_check ? RunMode::doubling_check : RunMode::experiment).dump();
        }
        return text;
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("workers") = py::none(),
      py::arg("doubling_check") = false,
      "Runs a config into `out` and returns summary.json as a string.");
}
