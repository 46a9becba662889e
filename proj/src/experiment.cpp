#include "atlas/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "atlas/coupling.hpp"
#include "atlas/excursion.hpp"
#include "atlas/io.hpp"
#include "atlas/parallel.hpp"
#include "atlas/reflect.hpp"
#include "atlas/stats.hpp"

namespace atlas {

using json = nlohmann::json;
namespace fs = std::filesystem;

ModelSpec alt_model_step_config(std::size_t d, double a) {
  if (d < 1) throw std::invalid_argument("alternative model needs d >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("alternative model needs a > 0");
  ModelSpec spec;
  spec.num_particles = d + 1;
  const double n = static_cast<double>(d + 1);
  spec.rank_drifts.resize(d + 1);
  spec.rank_drifts[0] = 1.0 - a / n;
  for (std::size_t j = 1; j <= d; ++j) spec.rank_drifts[j] = -static_cast<double>(j) * a / n;
  spec.rank_diffusions.assign(d + 1, 1.0);
  spec.bottom_drift_gamma = spec.rank_drifts[0];
  return spec;
}

ModelSpec build_model(const ModelConfig& m) {
  if (m.family == "atlas") return ModelSpec::atlas(m.particles, m.gamma);
  if (m.family == "alt") return alt_model_step_config(m.num_gaps(), m.a);
  ModelSpec spec;
  spec.num_particles = m.particles;
  spec.rank_drifts = m.drifts;
  spec.rank_diffusions = m.diffusions.empty() ? std::vector<double>(m.particles, 1.0) : m.diffusions;
  spec.bottom_drift_gamma = spec.rank_drifts.empty() ? 0.0 : spec.rank_drifts[0];
  spec.validate();
  return spec;
}

std::size_t truncation_heuristic(std::size_t monitored_k, double horizon) {
  const auto diffusive = static_cast<std::size_t>(std::ceil(10.0 * std::sqrt(std::max(0.0, horizon))));
  return std::max(4 * monitored_k, diffusive);
}

namespace {

NoiseStream base_noise(const ExperimentConfig& cfg) { return NoiseStream(cfg.seed, 0); }

SimulationOptions sim_options(const ModelConfig& m, std::uint64_t sample_every) {
  SimulationOptions o;
  o.horizon = m.horizon;
  o.dt = m.dt;
  o.sample_every = sample_every;
  o.solver.tolerance = m.solver_tolerance;
  o.solver.max_iterations = m.solver_max_iterations;
  return o;
}

void require_finite(double x, const std::string& what) {
  if (!std::isfinite(x)) throw NumericError("non-finite value in " + what);
}

json truncation_block(const ExperimentConfig& cfg) {
  const std::size_t need = truncation_heuristic(cfg.analysis.k, cfg.model.horizon);
  return json{{"m", cfg.model.num_gaps()}, {"heuristic_m", need}, {"ok", cfg.model.num_gaps() >= need}};
}

std::vector<std::string> trajectory_header(std::size_t m) {
  std::vector<std::string> header{"time"};
  for (std::size_t i = 1; i <= m; ++i) header.push_back("gap_" + std::to_string(i));
  for (std::size_t i = 1; i <= m; ++i) header.push_back("L_" + std::to_string(i));
  header.push_back("bottom");
  return header;
}

// Target rates for the stationarity comparisons.
std::vector<double> target_rates(const ExperimentConfig& cfg, const ModelSpec& spec, const std::string& target) {
  const std::size_t m = spec.num_gaps();
  std::vector<double> rates(m);
  if (target == "product_form") {
    try {
      return stationary_gap_rates(spec);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("analysis.target = product_form: ") + e.what());
    }
  }
  const double a = target == "pi_a_d" && cfg.analysis.a_target == 0.0 ? cfg.model.a : cfg.analysis.a_target;
  for (std::size_t i = 1; i <= m; ++i) {
    rates[i - 1] = target == "pi_a" ? pi_a_rate(a, i) : pi_a_finite_rate(a, m, i);
  }
  for (double r : rates) {
    if (!(r > 0.0)) throw ConfigError("analysis.target has a non-positive rate at this m");
  }
  return rates;
}

struct StationaryMember {
  GapVector init;
  std::vector<double> mean;  // time-averaged gaps after burn-in
  OccupancyEstimate occupancy;
  std::vector<GapState> rows;  // thinned trajectory rows, when kept
};

json run_stationarity(const ExperimentConfig& cfg, const fs::path& dir) {
  const ModelSpec spec = build_model(cfg.model);
  const std::size_t m = spec.num_gaps();
  const auto& an = cfg.analysis;
  const std::vector<double> t_grid = an.t_grid.empty() ? std::vector<double>{cfg.model.horizon} : an.t_grid;
  const std::string primary = an.target;
  const std::vector<double> rates = target_rates(cfg, spec, primary);
  std::vector<double> product_rates;
  try {
    product_rates = stationary_gap_rates(spec);
  } catch (const std::invalid_argument&) {
  }
  const NoiseStream noise = base_noise(cfg);
  const SimulationOptions sim = sim_options(cfg.model, 1);
  const double burn_in = cfg.model.burn_in;
  const std::uint64_t every = cfg.model.sample_every;

  std::vector<StationaryMember> members(an.ensemble_size);
  parallel_for(an.ensemble_size, cfg.workers, [&](std::size_t j) {
    StationaryMember& out = members[j];
    const NoiseStream member = noise.child(j);
    Rng rng = member.sampling_channel();
    out.init = generate_initial(cfg.initial, m, rng);
    const bool keep = an.trajectories == "all" || (an.trajectories == "first" && j == 0);
    std::vector<double> sum(m, 0.0);
    std::uint64_t count = 0;
    OccupancyRecorder rec(an.k, an.spacing);
    simulate_observed(spec, out.init, sim, member, [&](const GapState& s, std::uint64_t step) {
      if (s.time > burn_in) {
        for (std::size_t i = 0; i < m; ++i) sum[i] += s.gaps[i];
        ++count;
      }
      if (s.time >= burn_in) rec.observe(s.time - burn_in, s.gaps);
      if (keep && (step % every == 0)) out.rows.push_back(s);
    });
    out.mean.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      out.mean[i] = count ? sum[i] / static_cast<double>(count) : NAN;
      require_finite(out.mean[i], "gap means");
    }
    std::vector<double> grid;
    for (double t : t_grid) grid.push_back(t - burn_in);
    out.occupancy = rec.estimate(grid);
  });

  // Files are written here, after the merge, in member order.
  write_initial_csv(dir / "initial.csv", members.front().init);
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (members[j].rows.empty()) continue;
    const std::string name = an.trajectories == "all" ? "trajectory_" + std::to_string(j) + ".csv" : "trajectory.csv";
    CsvWriter w(dir / name, trajectory_header(m));
    for (const auto& s : members[j].rows) {
      w.add(s.time);
      for (double z : s.gaps) w.add(z);
      for (double l : s.cum_local_times) w.add(l);
      w.add(s.bottom_position);
      w.end_row();
    }
    w.close();
  }

  const double n = static_cast<double>(members.size());
  json gap_rows = json::array();
  bool all_within = true;
  CsvWriter means_csv(dir / "gap_means.csv", {"coordinate", "target_mean", "mean", "se", "rel_error", "product_form_mean"});
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (const auto& mem : members) mean += mem.mean[i];
    mean /= n;
    double se = 0.0;
    if (members.size() > 1) {
      double ss = 0.0;
      for (const auto& mem : members) ss += (mem.mean[i] - mean) * (mem.mean[i] - mean);
      se = std::sqrt(ss / (n - 1.0) / n);
    }
    const double target = 1.0 / rates[i];
    const double rel = (mean - target) / target;
    const bool within = std::abs(rel) <= an.mean_tolerance;
    all_within = all_within && within;
    json row{{"coordinate", i + 1}, {"target_mean", target}, {"mean", mean}, {"se", se},
             {"rel_error", rel},    {"within_tolerance", within}};
    means_csv.add(i + 1).add(target).add(mean).add(se).add(rel);
    if (!product_rates.empty()) {
      row["product_form_mean"] = 1.0 / product_rates[i];
      means_csv.add(1.0 / product_rates[i]);
    } else {
      means_csv.add_empty();
    }
    means_csv.end_row();
    gap_rows.push_back(row);
  }
  means_csv.close();

  json occ_rows = json::array();
  bool ks_within = true;
  CsvWriter occ_csv(dir / "occupancy.csv", {"horizon", "coordinate", "rate", "ks_mean", "ks_se", "ks_pooled"});
  for (std::size_t h = 0; h < t_grid.size(); ++h) {
    for (std::size_t c = 0; c < an.k; ++c) {
      std::vector<double> ks;
      std::vector<double> pooled;
      for (const auto& mem : members) {
        const Ecdf& e = mem.occupancy.at(h, c);
        ks.push_back(ks_to_exponential(e, rates[c]));
        pooled.insert(pooled.end(), e.sorted().begin(), e.sorted().end());
      }
      double mean = 0.0;
      for (double x : ks) mean += x;
      mean /= n;
      double se = 0.0;
      if (ks.size() > 1) {
        double ss = 0.0;
        for (double x : ks) ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / (n - 1.0) / n);
      }
      const double ks_pooled = ks_to_exponential(Ecdf(std::move(pooled)), rates[c]);
      const bool within = mean <= an.ks_tolerance;
      if (h + 1 == t_grid.size()) ks_within = ks_within && within;
      occ_csv.add(t_grid[h]).add(c + 1).add(rates[c]).add(mean).add(se).add(ks_pooled);
      occ_csv.end_row();
      occ_rows.push_back(json{{"horizon", t_grid[h]}, {"coordinate", c + 1}, {"rate", rates[c]},
                              {"ks_mean", mean}, {"ks_se", se}, {"ks_pooled", ks_pooled},
                              {"within_tolerance", within}});
    }
  }
  occ_csv.close();

  json summary{{"kind", to_string(cfg.kind)},
               {"seed", cfg.seed},
               {"m", m},
               {"ensemble_size", members.size()},
               {"steps", step_count(cfg.model.horizon, cfg.model.dt)},
               {"burn_in", burn_in},
               {"target", primary},
               {"target_rates", rates},
               {"gap_means", gap_rows},
               {"all_means_within_tolerance", all_within},
               {"mean_tolerance", an.mean_tolerance},
               {"occupancy", occ_rows},
               {"all_ks_within_tolerance", ks_within},
               {"ks_tolerance", an.ks_tolerance},
               {"thinning", members.front().occupancy.thinning},
               {"truncation", truncation_block(cfg)}};
  if (!product_rates.empty()) summary["product_form_rates"] = product_rates;
  if (cfg.kind == ExperimentKind::alt_model) {
    std::vector<double> claimed;
    for (std::size_t i = 1; i <= m; ++i) claimed.push_back(1.0 / pi_a_finite_rate(cfg.model.a, m, i));
    summary["pi_a_d_means"] = claimed;
    summary["rank_drifts"] = spec.rank_drifts;
  }
  return summary;
}

// Lower and upper starting gaps for coupled run j.
std::pair<GapVector, GapVector> coupled_starts(const ExperimentConfig& cfg, std::size_t m, Rng& rng) {
  GapVector lower = generate_initial(cfg.initial, m, rng);
  GapVector upper = lower;
  const auto& c = cfg.coupling;
  if (c.upper == "shift") {
    upper[c.shift_index - 1] += c.shift;
  } else if (c.upper == "scale") {
    for (auto& x : upper) x *= c.factor;
  } else if (c.upper == "independent") {
    upper = generate_initial(*cfg.upper_initial, m, rng);
  }
  return {lower, upper};
}

struct CoupledMember {
  GapVector lower_init, upper_init;
  double l1_defect = 0.0;
  double violation = 0.0;
  double local_time_increase = 0.0;
  double max_boundary_term = 0.0;
  std::string csv_rows;
  ExcursionRecord excursions;
};

std::string coupled_rows(const CoupledRecord& rec, std::uint64_t every) {
  std::string out;
  for (std::size_t s = 0; s < rec.times.size(); ++s) {
    if (s % every != 0 && s + 1 != rec.times.size()) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < rec.num_gaps(); ++i) v = std::max(v, rec.gaps_lower[s][i] - rec.gaps_upper[s][i]);
    out += format_double(rec.times[s]) + ',' + format_double(rec.sum_delta_z[s]) + ',' +
           format_double(rec.delta_l1[s]) + ',' + format_double(rec.delta_lm[s]) + ',' + format_double(v) + '\n';
  }
  return out;
}

std::string chain_json(const std::vector<double>& chain) {
  std::string out = "[";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += ',';
    out += std::isfinite(chain[i]) ? format_double(chain[i]) : "null";
  }
  return out + "]";
}

json run_coupled(const ExperimentConfig& cfg, const fs::path& dir) {
  const ModelSpec lower_spec = build_model(cfg.model);
  const ModelSpec upper_spec =
      cfg.coupling.upper_gamma ? lower_spec.with_bottom_drift(*cfg.coupling.upper_gamma) : lower_spec;
  const std::size_t m = lower_spec.num_gaps();
  const bool excursions = cfg.kind == ExperimentKind::excursions;
  const auto& an = cfg.analysis;
  const NoiseStream noise = base_noise(cfg);
  const SimulationOptions sim = sim_options(cfg.model, 1);
  const std::size_t runs = cfg.coupling.runs;

  std::vector<CoupledMember> members(runs);
  parallel_for(runs, cfg.workers, [&](std::size_t j) {
    CoupledMember& out = members[j];
    const NoiseStream member = noise.child(j);
    Rng rng = member.sampling_channel();
    std::tie(out.lower_init, out.upper_init) = coupled_starts(cfg, m, rng);
    const CoupledRecord rec = couple_models(lower_spec, upper_spec, out.lower_init, out.upper_init, sim, member);
    const L1IdentityReport l1 = verify_l1_identity(rec);
    out.l1_defect = l1.max_defect;
    out.violation = rec.monotone_violation;
    out.local_time_increase = rec.local_time_increase;
    for (double b : l1.boundary_term) out.max_boundary_term = std::max(out.max_boundary_term, b);
    require_finite(out.l1_defect, "coupled run");
    if (cfg.coupling.write_paths) out.csv_rows = coupled_rows(rec, cfg.model.sample_every);
    if (excursions) {
      out.excursions = detect_excursions(rec.delta_path(), an.k, an.epsilon, cfg.model.horizon, an.zero_threshold);
    }
  });

  write_initial_csv(dir / "initial_lower.csv", members.front().lower_init);
  write_initial_csv(dir / "initial_upper.csv", members.front().upper_init);
  if (cfg.coupling.write_paths) {
    for (std::size_t j = 0; j < runs; ++j) {
      const std::string name = runs == 1 ? "coupled.csv" : "coupled_" + std::to_string(j) + ".csv";
      CsvWriter w(dir / name, {"time", "sum_dz", "dl1", "dlm", "violation"});
      w.close();
      std::ofstream(dir / name, std::ios::binary | std::ios::app) << members[j].csv_rows;
    }
  }

  json per_run = json::array();
  double l1 = 0.0, viol = 0.0, inc = 0.0;
  for (std::size_t j = 0; j < runs; ++j) {
    const auto& mem = members[j];
    l1 = std::max(l1, mem.l1_defect);
    viol = std::max(viol, mem.violation);
    inc = std::max(inc, mem.local_time_increase);
    per_run.push_back(json{{"run", j},
                           {"l1_defect", mem.l1_defect},
                           {"monotone_violation", mem.violation},
                           {"local_time_increase", mem.local_time_increase},
                           {"max_boundary_term", mem.max_boundary_term}});
  }
  json summary{{"kind", to_string(cfg.kind)},
               {"seed", cfg.seed},
               {"m", m},
               {"runs", runs},
               {"upper", cfg.coupling.upper},
               {"max_l1_defect", l1},
               {"max_monotone_violation", viol},
               {"max_local_time_increase", inc},
               {"per_run", per_run}};
  if (cfg.coupling.upper_gamma) summary["upper_gamma"] = *cfg.coupling.upper_gamma;
  if (!excursions) return summary;

  std::ofstream jsonl(dir / "excursions.jsonl", std::ios::binary);
  const double required = an.epsilon / std::pow(2.0, static_cast<double>(an.k)) - an.decrement_slack;
  std::size_t completed = 0, open = 0, decreasing = 0;
  std::vector<ExcursionRecord> records;
  for (std::size_t j = 0; j < runs; ++j) {
    const auto& r = members[j].excursions;
    for (std::size_t e = 0; e < r.n_t; ++e) {
      const bool done = e < r.completed();
      jsonl << "{\"run\":" << j << ",\"k\":" << r.k << ",\"eps\":" << format_double(r.epsilon)
            << ",\"sigma_open\":" << format_double(r.opening(e))
            << ",\"sigma_close\":" << (done ? format_double(r.closing(e)) : "null")
            << ",\"decrement\":" << (done ? format_double(r.decrements[e]) : "null")
            << ",\"chain\":" << chain_json(r.t_chains[e]) << "}\n";
      if (done) {
        ++completed;
        if (-r.decrements[e] >= required) ++decreasing;
      } else {
        ++open;
      }
    }
    records.push_back(r);
  }
  jsonl.close();
  if (!jsonl) throw std::runtime_error("failed writing excursions.jsonl");

  const TailReport tail = excursion_tail_stats(records, an.domination, an.k, cfg.model.horizon);
  summary["excursions"] = json{
      {"k", an.k},
      {"epsilon", an.epsilon},
      {"completed", completed},
      {"open_at_horizon", open},
      {"required_decrease", required},
      {"decreasing", decreasing},
      {"decreasing_fraction", completed ? static_cast<double>(decreasing) / static_cast<double>(completed) : 1.0},
  };
  summary["length_tail"] = json{{"domination", an.domination},
                                {"threshold", tail.threshold},
                                {"time_floor", tail.time_floor},
                                {"horizon_meets_floor", tail.horizon_meets_floor},
                                {"completed", tail.completed},
                                {"long_completed", tail.long_completed},
                                {"censored", tail.censored},
                                {"excursion_fraction", tail.excursion_fraction},
                                {"run_frequency", tail.run_frequency},
                                {"run_frequency_se", tail.run_frequency_se},
                                {"max_n_t", tail.max_n_t},
                                {"prob_nt_exceeds", tail.prob_nt_exceeds},
                                {"bound", tail.bound},
                                {"within_bound", tail.run_frequency <= tail.bound + 3.0 * tail.run_frequency_se}};
  return summary;
}

json run_doa(const ExperimentConfig& cfg, const fs::path& dir) {
  const ModelSpec spec = build_model(cfg.model);
  const auto& an = cfg.analysis;
  DoaOptions o;
  o.dt = cfg.model.dt;
  o.spacing = an.spacing;
  o.workers = cfg.workers;
  o.solver.tolerance = cfg.model.solver_tolerance;
  o.solver.max_iterations = cfg.model.solver_max_iterations;
  const DoaReport rep =
      doa_experiment(spec, cfg.initial, an.a_target, an.k, an.t_grid, an.ensemble_size, o, base_noise(cfg));

  CsvWriter w(dir / "doa.csv", {"horizon", "coordinate", "ks_mean", "ks_se", "trend"});
  json rows = json::array();
  for (const auto& r : rep.rows) {
    require_finite(r.ks_mean, "KS distances");
    w.add(r.horizon).add(r.coordinate).add(r.ks_mean).add(r.ks_se).add(std::string(r.trend ? "1" : "0"));
    w.end_row();
    rows.push_back(json{{"horizon", r.horizon}, {"coordinate", r.coordinate}, {"ks_mean", r.ks_mean},
                        {"ks_se", r.ks_se},     {"ks_pooled", r.ks_pooled},   {"trend", r.trend}});
  }
  w.close();
  std::vector<bool> trend(rep.trend.begin(), rep.trend.end());
  std::vector<bool> pooled(rep.pooled_trend.begin(), rep.pooled_trend.end());
  return json{{"kind", to_string(cfg.kind)},
              {"seed", cfg.seed},
              {"m", spec.num_gaps()},
              {"a_target", an.a_target},
              {"k", an.k},
              {"t_grid", an.t_grid},
              {"ensemble_size", an.ensemble_size},
              {"thinning", rep.thinning},
              {"rows", rows},
              {"trend", trend},
              {"pooled_trend", pooled},
              {"truncation", truncation_block(cfg)}};
}

json run_bounds(const ExperimentConfig& cfg, const fs::path& dir) {
  const ModelSpec spec = build_model(cfg.model);
  BoundSweepOptions o;
  o.runs = cfg.bounds.runs;
  o.dt = cfg.bounds.dt > 0.0 ? cfg.bounds.dt : cfg.model.dt;
  o.workers = cfg.workers;
  const auto results = bound_sweep(spec, cfg.initial, cfg.bounds.points, o, base_noise(cfg));

  CsvWriter w(dir / "bounds.csv", {"k", "l", "d", "t", "gamma_level", "bound_sup", "bound_inf", "empirical", "se"});
  json rows = json::array();
  bool all_valid = true;
  for (const auto& r : results) {
    const auto& p = r.point;
    w.add(p.k).add(p.l).add(p.d).add(p.t).add(p.level).add(r.bound_sup).add_empty().add(r.empirical_sup).add(r.se_sup);
    w.end_row();
    w.add(p.k).add(p.l).add(p.d).add(p.t).add(p.level).add_empty().add(r.bound_inf).add(r.empirical_inf).add(r.se_inf);
    w.end_row();
    const bool sup_ok = r.empirical_sup <= r.bound_sup + 3.0 * r.se_sup;
    const bool inf_ok = r.empirical_inf <= r.bound_inf + 3.0 * r.se_inf;
    all_valid = all_valid && sup_ok && inf_ok;
    rows.push_back(json{{"k", p.k},
                        {"l", p.l},
                        {"d", p.d},
                        {"t", p.t},
                        {"gamma_level", p.level},
                        {"bound_sup", r.bound_sup},
                        {"bound_inf", r.bound_inf},
                        {"empirical_sup", r.empirical_sup},
                        {"empirical_inf", r.empirical_inf},
                        {"se_sup", r.se_sup},
                        {"se_inf", r.se_inf},
                        {"clamped_sup", r.clamped_sup},
                        {"clamped_inf", r.clamped_inf},
                        {"sup_valid", sup_ok},
                        {"inf_valid", inf_ok}});
  }
  w.close();
  return json{{"kind", to_string(cfg.kind)}, {"seed", cfg.seed},   {"m", spec.num_gaps()},
              {"runs", o.runs},              {"dt", o.dt},          {"points", rows},
              {"all_valid", all_valid}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

DoublingReport truncation_doubling_check(const ExperimentConfig& cfg, std::size_t k) {
  const auto& mc = cfg.model;
  if (mc.family == "general") throw ConfigError("doubling-check needs family = atlas or alt");
  const std::size_t m = mc.num_gaps();
  if (k == 0 || k > m) throw ConfigError("monitored k must be in 1..m");
  ModelConfig doubled = mc;
  doubled.particles = 2 * m + 1;
  const ModelSpec small = build_model(mc);
  const ModelSpec big = build_model(doubled);

  const NoiseStream member = base_noise(cfg).child(0);
  Rng rng = member.sampling_channel();
  const GapVector init_big = generate_initial(cfg.initial, 2 * m, rng);
  const GapVector init_small(init_big.begin(), init_big.begin() + static_cast<std::ptrdiff_t>(m));
  const SimulationOptions sim = sim_options(mc, mc.sample_every);
  const Trajectory a = simulate(small, init_small, sim, member);
  const Trajectory b = simulate(big, init_big, sim, member);

  DoublingReport rep;
  rep.m = m;
  rep.monitored_k = k;
  rep.threshold = cfg.analysis.doubling_threshold;
  rep.max_abs.assign(k, 0.0);
  rep.scale.assign(k, 0.0);
  rep.relative.assign(k, 0.0);
  for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
    rep.times.push_back(a.snapshots[s].time);
    for (std::size_t i = 0; i < k; ++i) {
      const double zb = b.snapshots[s].gaps[i];
      rep.max_abs[i] = std::max(rep.max_abs[i], std::abs(a.snapshots[s].gaps[i] - zb));
      rep.scale[i] += std::abs(zb);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    rep.scale[i] /= static_cast<double>(a.snapshots.size());
    rep.relative[i] = rep.max_abs[i] == 0.0 ? 0.0 : rep.max_abs[i] / rep.scale[i];
    require_finite(rep.relative[i], "doubling check");
    rep.max_relative = std::max(rep.max_relative, rep.relative[i]);
  }
  rep.flagged = rep.max_relative > rep.threshold;
  return rep;
}

json run_doubling_check(const ExperimentConfig& cfg, const fs::path& dir) {
  const DoublingReport rep = truncation_doubling_check(cfg, cfg.analysis.k);
  CsvWriter w(dir / "doubling.csv", {"coordinate", "max_abs", "scale", "relative"});
  for (std::size_t i = 0; i < rep.monitored_k; ++i) {
    w.add(i + 1).add(rep.max_abs[i]).add(rep.scale[i]).add(rep.relative[i]);
    w.end_row();
  }
  w.close();
  return json{{"kind", "doubling-check"},
              {"seed", cfg.seed},
              {"m", rep.m},
              {"doubled_m", 2 * rep.m},
              {"monitored_k", rep.monitored_k},
              {"threshold", rep.threshold},
              {"max_relative", rep.max_relative},
              {"flagged", rep.flagged},
              {"truncation", truncation_block(cfg)}};
}

json run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
  validate_config(cfg);
  switch (cfg.kind) {
    case ExperimentKind::stationarity:
    case ExperimentKind::alt_model:
      return run_stationarity(cfg, dir);
    case ExperimentKind::coupling:
    case ExperimentKind::excursions:
      return run_coupled(cfg, dir);
    case ExperimentKind::doa:
      return run_doa(cfg, dir);
    case ExperimentKind::bounds:
      return run_bounds(cfg, dir);
  }
  throw ConfigError("unknown experiment kind");
}

fs::path default_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output.empty()) return cfg.output;
  return fs::path("runs") / (to_string(cfg.kind) + "-seed" + std::to_string(cfg.seed));
}

json execute(const ExperimentConfig& cfg, const fs::path& out, RunMode mode) {
  validate_config(cfg);
  fs::path staging = out;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    write_text(staging / kResolvedConfigFile, render_config(cfg));
    json summary = mode == RunMode::experiment ? run_experiment(cfg, staging) : run_doubling_check(cfg, staging);
    write_text(staging / kSummaryFile, summary.dump(2) + "\n");
    fs::remove_all(out);
    fs::rename(staging, out);
    return summary;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace atlas
