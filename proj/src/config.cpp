#include "atlas/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "atlas/io.hpp"

namespace atlas {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> names{
      {"stationarity", ExperimentKind::stationarity}, {"coupling", ExperimentKind::coupling},
      {"excursions", ExperimentKind::excursions},     {"doa", ExperimentKind::doa},
      {"bounds", ExperimentKind::bounds},             {"alt-model", ExperimentKind::alt_model},
  };
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops `; comment` and `# comment` tails (a marker at line start or after whitespace).
std::string strip_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t cut = std::string::npos;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        cut = i;
        break;
      }
    }
    out << trim(line.substr(0, cut)) << '\n';
  }
  return out.str();
}

double to_double(const std::string& where, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
}

std::uint64_t to_uint(const std::string& where, const std::string& text) {
  try {
    if (text.empty() || text[0] == '-' || text[0] == '+') throw std::invalid_argument("sign");
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 10);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
  }
}

bool to_bool(const std::string& where, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(where + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ' ')) {
    for (const auto& tok : split(item, ',')) out.push_back(to_double(where, tok));
  }
  return out;
}

// Typed access to one INI section; remembers which keys were read.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }
  const std::string& name() const { return name_; }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  std::string where(const std::string& key) const { return name_ + "." + key; }

  std::string text(const std::string& key, const std::string& fallback) {
    return raw(key).value_or(fallback);
  }
  double number(const std::string& key, double fallback) {
    const auto v = raw(key);
    return v ? to_double(where(key), *v) : fallback;
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    return v ? to_uint(where(key), *v) : fallback;
  }
  bool flag(const std::string& key, bool fallback) {
    const auto v = raw(key);
    return v ? to_bool(where(key), *v) : fallback;
  }
  std::vector<double> list(const std::string& key) {
    const auto v = raw(key);
    return v ? to_list(where(key), *v) : std::vector<double>{};
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, value] : *tree_) {
      if (!value.empty()) throw ConfigError("section [" + name_ + "] has a nested entry '" + key + "'");
      if (!used_.count(key)) throw ConfigError("unknown key " + name_ + "." + key);
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

class Document {
 public:
  explicit Document(pt::ptree root) : root_(std::move(root)) {
    for (const auto& [name, body] : root_) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("key '" + name + "' is outside any section");
      }
    }
  }

  Section section(const std::string& name) {
    used_.insert(name);
    const auto it = root_.find(name);
    return Section(it == root_.not_found() ? nullptr : &it->second, name);
  }

  void finish() const {
    for (const auto& [name, body] : root_) {
      if (!used_.count(name)) throw ConfigError("unknown section [" + name + "]");
    }
  }

 private:
  pt::ptree root_;
  std::set<std::string> used_;
};

LambdaSequence parse_lambda(Section& s) {
  LambdaSequence lam;
  const std::string kind = s.text("lambda", "constant");
  if (kind == "constant") {
    lam.kind = LambdaSequence::Kind::constant;
  } else if (kind == "power") {
    lam.kind = LambdaSequence::Kind::power;
  } else if (kind == "i_over_loglog") {
    lam.kind = LambdaSequence::Kind::i_over_loglog;
  } else {
    throw ConfigError(s.where("lambda") + ": unknown sequence '" + kind + "'");
  }
  lam.scale = s.number("lambda_scale", 1.0);
  lam.exponent = s.number("lambda_exponent", 0.0);
  return lam;
}

ThetaLaw parse_theta(Section& s) {
  const std::string name = s.text("theta", "exponential");
  if (name == "exponential") return ThetaLaw::exponential;
  if (name == "uniform") return ThetaLaw::uniform;
  if (name == "constant") return ThetaLaw::constant;
  throw ConfigError(s.where("theta") + ": unknown law '" + name + "'");
}

InitialCondition parse_initial(Document& doc, const std::string& name, const std::filesystem::path& base,
                               int depth) {
  if (depth > 8) throw ConfigError("initial-condition sections nest too deeply");
  Section s = doc.section(name);
  if (!s.present()) throw ConfigError("missing section [" + name + "]");
  const std::string kind = s.text("kind", "");
  InitialCondition ic;
  if (kind == "stationary_pi_a") {
    ic.kind = InitialCondition::StationaryPiA{s.number("a", 0.0)};
  } else if (kind == "finite_pi_d") {
    ic.kind = InitialCondition::FinitePiD{};
  } else if (kind == "finite_pi_a_d") {
    ic.kind = InitialCondition::FinitePiAD{s.number("a", 1.0)};
  } else if (kind == "dominating_exp") {
    ic.kind = InitialCondition::DominatingExp{s.number("rate", 1.0)};
  } else if (kind == "scaled_iid") {
    InitialCondition::ScaledIid k;
    k.lambda = parse_lambda(s);
    k.theta = parse_theta(s);
    ic.kind = k;
  } else if (kind == "perturbed_exp") {
    InitialCondition::PerturbedExp k;
    k.a = s.number("a", 1.0);
    k.lambda = parse_lambda(s);
    k.beta = s.number("beta", 0.9);
    ic.kind = k;
  } else if (kind == "adversarial_blocks") {
    ic.kind = InitialCondition::AdversarialBlocks{};
  } else if (kind == "explicit") {
    const auto gaps = s.raw("gaps");
    const auto file = s.raw("file");
    if (gaps.has_value() == file.has_value()) {
      throw ConfigError(name + ": explicit needs exactly one of gaps or file");
    }
    InitialCondition::Explicit k;
    if (gaps) {
      k.gaps = to_list(s.where("gaps"), *gaps);
    } else {
      std::filesystem::path p(*file);
      if (p.is_relative()) p = base / p;
      try {
        k.gaps = read_initial_csv(p);
      } catch (const std::exception& e) {
        throw ConfigError(s.where("file") + ": " + e.what());
      }
    }
    ic.kind = k;
  } else if (kind == "pointwise_min") {
    const std::string first = s.text("first", "");
    const std::string second = s.text("second", "");
    if (first.empty() || second.empty()) throw ConfigError(name + ": pointwise_min needs first and second");
    ic = InitialCondition::pointwise_min(parse_initial(doc, first, base, depth + 1),
                                         parse_initial(doc, second, base, depth + 1));
  } else if (kind.empty()) {
    throw ConfigError(s.where("kind") + " is required");
  } else {
    throw ConfigError(s.where("kind") + ": unknown initial condition '" + kind + "'");
  }
  s.finish();
  return ic;
}

BoundSweepPoint parse_point(const std::string& where, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 5) throw ConfigError(where + ": points are k:l:d:t:level, got '" + text + "'");
  BoundSweepPoint p;
  p.k = to_uint(where, parts[0]);
  p.l = to_uint(where, parts[1]);
  p.d = to_uint(where, parts[2]);
  p.t = to_double(where, parts[3]);
  p.level = to_double(where, parts[4]);
  return p;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  const auto it = kind_names().find(name);
  if (it == kind_names().end()) throw ConfigError("unknown experiment kind '" + name + "'");
  return it->second;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream cleaned(strip_comments(in));
    pt::read_ini(cleaned, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Document doc(std::move(root));
  ExperimentConfig cfg;

  Section exp = doc.section("experiment");
  if (!exp.present()) throw ConfigError("missing section [experiment]");
  const auto kind = exp.raw("kind");
  if (!kind) throw ConfigError("experiment.kind is required");
  cfg.kind = parse_kind(*kind);
  cfg.seed = exp.count("seed", 1);
  cfg.workers = exp.count("workers", 1);
  cfg.output = exp.text("output", "");
  exp.finish();

  Section model = doc.section("model");
  auto& m = cfg.model;
  m.family = model.text("family", "atlas");
  m.particles = model.count("particles", 4);
  m.gamma = model.number("gamma", 1.0);
  m.a = model.number("a", 1.0);
  m.drifts = model.list("drifts");
  m.diffusions = model.list("diffusions");
  m.dt = model.number("dt", 1e-3);
  m.horizon = model.number("horizon", 10.0);
  m.burn_in = model.number("burn_in", 0.0);
  m.sample_every = model.count("sample_every", 1);
  m.solver_tolerance = model.number("solver_tolerance", 1e-12);
  m.solver_max_iterations = static_cast<int>(model.count("solver_max_iterations", 0));
  model.finish();

  if (cfg.kind != ExperimentKind::alt_model || doc.section("initial").present()) {
    cfg.initial = parse_initial(doc, "initial", base_dir, 0);
  } else {
    cfg.initial.kind = InitialCondition::FinitePiAD{m.a};
  }

  Section coup = doc.section("coupling");
  auto& c = cfg.coupling;
  c.upper = coup.text("upper", "shift");
  c.factor = coup.number("factor", 2.0);
  c.shift_index = coup.count("shift_index", 1);
  c.shift = coup.number("shift", 1.0);
  if (const auto g = coup.raw("upper_gamma")) c.upper_gamma = to_double(coup.where("upper_gamma"), *g);
  c.runs = coup.count("runs", 1);
  c.write_paths = coup.flag("write_paths", true);
  const std::string upper_section = coup.text("upper_initial", "");
  coup.finish();
  if (c.upper == "independent") {
    if (upper_section.empty()) throw ConfigError("coupling.upper_initial is required for upper = independent");
    cfg.upper_initial = parse_initial(doc, upper_section, base_dir, 0);
  } else if (!upper_section.empty()) {
    throw ConfigError("coupling.upper_initial only applies to upper = independent");
  }

  Section an = doc.section("analysis");
  auto& a = cfg.analysis;
  a.k = an.count("k", 1);
  a.epsilon = an.number("epsilon", 0.1);
  a.zero_threshold = an.number("zero_threshold", 1e-11);
  a.domination = an.number("domination", 1.0);
  a.t_grid = an.list("t_grid");
  a.ensemble_size = an.count("ensemble_size", 1);
  a.spacing = an.number("spacing", 0.1);
  a.a_target = an.number("a_target", 0.0);
  a.target = an.text("target", cfg.kind == ExperimentKind::alt_model ? "pi_a_d" : "product_form");
  a.mean_tolerance = an.number("mean_tolerance", 0.05);
  a.ks_tolerance = an.number("ks_tolerance", 0.03);
  a.decrement_slack = an.number("decrement_slack", 1e-3);
  a.doubling_threshold = an.number("doubling_threshold", 1e-3);
  a.trajectories = an.text("trajectories", "first");
  an.finish();

  Section bd = doc.section("bounds");
  if (const auto pts = bd.raw("points")) {
    for (const auto& item : split(*pts, ' ')) {
      for (const auto& tok : split(item, ',')) cfg.bounds.points.push_back(parse_point(bd.where("points"), tok));
    }
  }
  cfg.bounds.runs = bd.count("runs", 1000);
  cfg.bounds.dt = bd.number("dt", 0.0);
  bd.finish();

  doc.finish();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, path.parent_path());
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  require(cfg.workers >= 1, "experiment.workers must be >= 1");
  require(m.particles >= 2, "model.particles must be >= 2");
  require(finite_positive(m.dt), "model.dt must be positive");
  require(finite_positive(m.horizon), "model.horizon must be positive");
  require(std::isfinite(m.burn_in) && m.burn_in >= 0.0 && m.burn_in < m.horizon,
          "model.burn_in must be in [0, horizon)");
  require(m.sample_every >= 1, "model.sample_every must be >= 1");
  require(finite_positive(m.solver_tolerance), "model.solver_tolerance must be positive");
  require(m.solver_max_iterations >= 0, "model.solver_max_iterations must be >= 0");
  if (m.family == "atlas") {
    require(std::isfinite(m.gamma), "model.gamma must be finite");
  } else if (m.family == "alt") {
    require(finite_positive(m.a), "model.a must be positive for the alt family");
  } else if (m.family == "general") {
    require(m.drifts.size() == m.particles, "model.drifts needs one entry per particle");
    require(m.diffusions.empty() || m.diffusions.size() == m.particles,
            "model.diffusions needs one entry per particle");
    for (double b : m.diffusions) require(finite_positive(b), "model.diffusions must be positive");
    for (double d : m.drifts) require(std::isfinite(d), "model.drifts must be finite");
  } else {
    throw ConfigError("model.family must be atlas, alt or general");
  }
  if (m.family != "general") {
    require(m.drifts.empty() && m.diffusions.empty(), "model.drifts/diffusions only apply to family = general");
  }
  if (cfg.kind == ExperimentKind::alt_model) require(m.family == "alt", "alt-model experiments need family = alt");

  const std::size_t gaps = m.num_gaps();
  auto check_initial = [&](const InitialCondition& ic, const std::string& label) {
    Rng probe(0, 0, 0);
    try {
      generate_initial(ic, gaps, probe);
    } catch (const std::exception& e) {
      throw ConfigError(label + ": " + e.what());
    }
  };
  check_initial(cfg.initial, "initial");
  if (cfg.upper_initial) check_initial(*cfg.upper_initial, "coupling.upper_initial");

  const auto& c = cfg.coupling;
  require(c.upper == "shift" || c.upper == "scale" || c.upper == "same" || c.upper == "independent",
          "coupling.upper must be shift, scale, same or independent");
  require(c.runs >= 1, "coupling.runs must be >= 1");
  if (c.upper == "shift") {
    require(c.shift_index >= 1 && c.shift_index <= gaps, "coupling.shift_index must be in 1..m");
    require(std::isfinite(c.shift) && c.shift >= 0.0, "coupling.shift must be >= 0");
  }
  if (c.upper == "scale") require(std::isfinite(c.factor) && c.factor >= 1.0, "coupling.factor must be >= 1");
  if (c.upper_gamma) {
    require(std::isfinite(*c.upper_gamma) && *c.upper_gamma <= m.gamma,
            "coupling.upper_gamma must not exceed the lower bottom drift");
    require(m.family == "atlas", "coupling.upper_gamma needs family = atlas");
  }

  const auto& a = cfg.analysis;
  require(a.k >= 1 && a.k <= gaps, "analysis.k must be in 1..m");
  require(finite_positive(a.epsilon), "analysis.epsilon must be positive");
  require(finite_positive(a.zero_threshold), "analysis.zero_threshold must be positive");
  require(std::isfinite(a.domination) && a.domination >= 1.0, "analysis.domination must be >= 1");
  require(a.ensemble_size >= 1, "analysis.ensemble_size must be >= 1");
  require(std::isfinite(a.spacing) && a.spacing >= 0.0, "analysis.spacing must be >= 0");
  require(std::isfinite(a.a_target) && a.a_target >= 0.0, "analysis.a_target must be >= 0");
  require(a.target == "product_form" || a.target == "pi_a" || a.target == "pi_a_d",
          "analysis.target must be product_form, pi_a or pi_a_d");
  if (a.target == "pi_a_d") require(a.a_target > 0.0 || m.family == "alt", "analysis.target = pi_a_d needs a > 0");
  require(finite_positive(a.mean_tolerance), "analysis.mean_tolerance must be positive");
  require(finite_positive(a.ks_tolerance), "analysis.ks_tolerance must be positive");
  require(std::isfinite(a.decrement_slack) && a.decrement_slack >= 0.0, "analysis.decrement_slack must be >= 0");
  require(finite_positive(a.doubling_threshold), "analysis.doubling_threshold must be positive");
  require(a.trajectories == "first" || a.trajectories == "all" || a.trajectories == "none",
          "analysis.trajectories must be first, all or none");
  for (std::size_t h = 0; h < a.t_grid.size(); ++h) {
    require(finite_positive(a.t_grid[h]), "analysis.t_grid entries must be positive");
    require(h == 0 || a.t_grid[h] > a.t_grid[h - 1], "analysis.t_grid must be increasing");
    require(a.t_grid[h] <= m.horizon * (1.0 + 1e-12), "analysis.t_grid exceeds model.horizon");
  }
  if (cfg.kind == ExperimentKind::doa) require(!a.t_grid.empty(), "doa experiments need analysis.t_grid");

  if (cfg.kind == ExperimentKind::bounds) {
    require(!cfg.bounds.points.empty(), "bounds experiments need bounds.points");
    require(cfg.bounds.runs >= 1, "bounds.runs must be >= 1");
    require(cfg.bounds.dt == 0.0 || finite_positive(cfg.bounds.dt), "bounds.dt must be positive");
    for (const auto& p : cfg.bounds.points) {
      require(p.k <= gaps && p.d >= 1 && p.d <= gaps, "bounds point k and d must be in range");
      require(p.l >= 1 && p.l <= gaps + 1, "bounds point l must be in 1..m+1");
      require(finite_positive(p.t), "bounds point t must be positive");
      require(std::isfinite(p.level), "bounds point level must be finite");
    }
  }
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

std::string lambda_name(LambdaSequence::Kind k) {
  switch (k) {
    case LambdaSequence::Kind::constant:
      return "constant";
    case LambdaSequence::Kind::power:
      return "power";
    case LambdaSequence::Kind::i_over_loglog:
      return "i_over_loglog";
  }
  return "constant";
}

std::string theta_name(ThetaLaw t) {
  switch (t) {
    case ThetaLaw::exponential:
      return "exponential";
    case ThetaLaw::uniform:
      return "uniform";
    case ThetaLaw::constant:
      return "constant";
  }
  return "exponential";
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void render_initial(std::ostream& out, const InitialCondition& ic, const std::string& name) {
  std::vector<std::pair<std::string, const InitialCondition*>> nested;
  out << "\n[" << name << "]\n";
  out << "kind = " << ic.name() << "\n";
  std::visit(overloaded{
                 [&](const InitialCondition::StationaryPiA& k) { out << "a = " << format_double(k.a) << "\n"; },
                 [&](const InitialCondition::FinitePiD&) {},
                 [&](const InitialCondition::FinitePiAD& k) { out << "a = " << format_double(k.a) << "\n"; },
                 [&](const InitialCondition::DominatingExp& k) {
                   out << "rate = " << format_double(k.rate) << "\n";
                 },
                 [&](const InitialCondition::ScaledIid& k) {
                   out << "lambda = " << lambda_name(k.lambda.kind) << "\n";
                   out << "lambda_scale = " << format_double(k.lambda.scale) << "\n";
                   out << "lambda_exponent = " << format_double(k.lambda.exponent) << "\n";
                   out << "theta = " << theta_name(k.theta) << "\n";
                 },
                 [&](const InitialCondition::PerturbedExp& k) {
                   out << "a = " << format_double(k.a) << "\n";
                   out << "lambda = " << lambda_name(k.lambda.kind) << "\n";
                   out << "lambda_scale = " << format_double(k.lambda.scale) << "\n";
                   out << "lambda_exponent = " << format_double(k.lambda.exponent) << "\n";
                   out << "beta = " << format_double(k.beta) << "\n";
                 },
                 [&](const InitialCondition::AdversarialBlocks&) {},
                 [&](const InitialCondition::Explicit& k) { out << "gaps = " << join(k.gaps) << "\n"; },
                 [&](const InitialCondition::PointwiseMin& k) {
                   out << "first = " << name << "_first\n";
                   out << "second = " << name << "_second\n";
                   nested.emplace_back(name + "_first", k.first.get());
                   nested.emplace_back(name + "_second", k.second.get());
                 },
             },
             ic.kind);
  for (const auto& [child, cond] : nested) render_initial(out, *cond, child);
}

}  // namespace

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& m = cfg.model;
  out << "; resolved experiment configuration\n";
  out << "[experiment]\n";
  out << "kind = " << to_string(cfg.kind) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "workers = " << cfg.workers << "\n";
  if (!cfg.output.empty()) out << "output = " << cfg.output << "\n";

  out << "\n[model]\n";
  out << "family = " << m.family << "\n";
  out << "particles = " << m.particles << "\n";
  if (m.family == "atlas") out << "gamma = " << format_double(m.gamma) << "\n";
  if (m.family == "alt") out << "a = " << format_double(m.a) << "\n";
  if (m.family == "general") {
    out << "drifts = " << join(m.drifts) << "\n";
    if (!m.diffusions.empty()) out << "diffusions = " << join(m.diffusions) << "\n";
  }
  out << "dt = " << format_double(m.dt) << "\n";
  out << "horizon = " << format_double(m.horizon) << "\n";
  out << "burn_in = " << format_double(m.burn_in) << "\n";
  out << "sample_every = " << m.sample_every << "\n";
  out << "solver_tolerance = " << format_double(m.solver_tolerance) << "\n";
  out << "solver_max_iterations = " << m.solver_max_iterations << "\n";

  render_initial(out, cfg.initial, "initial");

  const auto& c = cfg.coupling;
  out << "\n[coupling]\n";
  out << "upper = " << c.upper << "\n";
  out << "factor = " << format_double(c.factor) << "\n";
  out << "shift_index = " << c.shift_index << "\n";
  out << "shift = " << format_double(c.shift) << "\n";
  if (c.upper_gamma) out << "upper_gamma = " << format_double(*c.upper_gamma) << "\n";
  out << "runs = " << c.runs << "\n";
  out << "write_paths = " << (c.write_paths ? "true" : "false") << "\n";
  if (cfg.upper_initial) out << "upper_initial = upper_initial\n";

  const auto& a = cfg.analysis;
  out << "\n[analysis]\n";
  out << "k = " << a.k << "\n";
  out << "epsilon = " << format_double(a.epsilon) << "\n";
  out << "zero_threshold = " << format_double(a.zero_threshold) << "\n";
  out << "domination = " << format_double(a.domination) << "\n";
  if (!a.t_grid.empty()) out << "t_grid = " << join(a.t_grid) << "\n";
  out << "ensemble_size = " << a.ensemble_size << "\n";
  out << "spacing = " << format_double(a.spacing) << "\n";
  out << "a_target = " << format_double(a.a_target) << "\n";
  out << "target = " << a.target << "\n";
  out << "mean_tolerance = " << format_double(a.mean_tolerance) << "\n";
  out << "ks_tolerance = " << format_double(a.ks_tolerance) << "\n";
  out << "decrement_slack = " << format_double(a.decrement_slack) << "\n";
  out << "doubling_threshold = " << format_double(a.doubling_threshold) << "\n";
  out << "trajectories = " << a.trajectories << "\n";

  out << "\n[bounds]\n";
  if (!cfg.bounds.points.empty()) {
    out << "points =";
    for (const auto& p : cfg.bounds.points) {
      out << " " << p.k << ":" << p.l << ":" << p.d << ":" << format_double(p.t) << ":" << format_double(p.level);
    }
    out << "\n";
  }
  out << "runs = " << cfg.bounds.runs << "\n";
  out << "dt = " << format_double(cfg.bounds.dt) << "\n";

  if (cfg.upper_initial) render_initial(out, *cfg.upper_initial, "upper_initial");
  return out.str();
}

}  // namespace atlas
