#include "atlas/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "atlas/reflect.hpp"

namespace atlas {

void validate_gaps(const GapVector& gaps) {
  for (double g : gaps) {
    if (!std::isfinite(g) || g < 0.0) throw std::invalid_argument("gap vector has a negative or non-finite entry");
  }
}

ModelSpec ModelSpec::atlas(std::size_t num_particles, double gamma) {
  ModelSpec spec;
  spec.num_particles = num_particles;
  spec.rank_drifts.assign(num_particles, 0.0);
  spec.rank_diffusions.assign(num_particles, 1.0);
  if (num_particles > 0) spec.rank_drifts[0] = gamma;
  spec.bottom_drift_gamma = gamma;
  return spec;
}

ModelSpec ModelSpec::with_bottom_drift(double gamma) const {
  ModelSpec out = *this;
  out.rank_drifts.at(0) = gamma;
  out.bottom_drift_gamma = gamma;
  return out;
}

void ModelSpec::validate() const {
  if (num_particles < 2) throw std::invalid_argument("model needs at least 2 particles");
  if (rank_drifts.size() != num_particles || rank_diffusions.size() != num_particles) {
    throw std::invalid_argument("rank drift/diffusion vectors must have one entry per particle");
  }
  for (double a : rank_drifts) {
    if (!std::isfinite(a)) throw std::invalid_argument("rank drifts must be finite");
  }
  for (double b : rank_diffusions) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("rank diffusions must be strictly positive");
  }
}

std::vector<double> stationary_gap_rates(const ModelSpec& spec) {
  spec.validate();
  for (double b : spec.rank_diffusions) {
    if (b != 1.0) throw std::invalid_argument("stationary product law only tabulated for unit diffusions");
  }
  const std::size_t m = spec.num_gaps();
  const auto inv = reflection_matrix_inverse(m);
  std::vector<double> rates(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      acc -= inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             (spec.rank_drifts[j + 1] - spec.rank_drifts[j]);
    }
    if (!(acc > 0.0)) throw std::invalid_argument("model has no stationary gap law (non-positive rate)");
    rates[i] = acc;
  }
  return rates;
}

double pi_a_rate(double a, std::size_t i) { return 2.0 + static_cast<double>(i) * a; }

double pi_finite_rate(std::size_t d, std::size_t i) {
  return 2.0 * (1.0 - static_cast<double>(i) / static_cast<double>(d + 1));
}

double pi_a_finite_rate(double a, std::size_t d, std::size_t i) {
  return pi_a_rate(a, i) * (1.0 - static_cast<double>(i) / static_cast<double>(d + 1));
}

GapVector sample_pi_a(double a, std::size_t m, Rng& rng) {
  if (!(a >= 0.0)) throw std::invalid_argument("pi_a needs a >= 0");
  if (m == 0) throw std::invalid_argument("pi_a needs at least one gap");
  GapVector gaps(m);
  for (std::size_t i = 1; i <= m; ++i) gaps[i - 1] = rng.exponential(pi_a_rate(a, i));
  return gaps;
}

GapVector sample_pi_finite(std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("pi^(d) needs d >= 1");
  GapVector gaps(d);
  for (std::size_t i = 1; i <= d; ++i) gaps[i - 1] = rng.exponential(pi_finite_rate(d, i));
  return gaps;
}

GapVector sample_pi_a_finite(double a, std::size_t d, Rng& rng) {
  if (!(a > 0.0)) throw std::invalid_argument("pi^{a,(d)} needs a > 0");
  if (d == 0) throw std::invalid_argument("pi^{a,(d)} needs d >= 1");
  GapVector gaps(d);
  for (std::size_t i = 1; i <= d; ++i) gaps[i - 1] = rng.exponential(pi_a_finite_rate(a, d, i));
  return gaps;
}

double LambdaSequence::at(std::size_t i) const {
  const double x = static_cast<double>(i);
  switch (kind) {
    case Kind::constant:
      return scale;
    case Kind::power:
      return scale * std::pow(x, exponent);
    case Kind::i_over_loglog:
      return scale * x / std::log(std::log(std::numbers::e + x));
  }
  return scale;
}

InitialCondition InitialCondition::pointwise_min(InitialCondition a, InitialCondition b) {
  InitialCondition ic;
  ic.kind = PointwiseMin{std::make_shared<const InitialCondition>(std::move(a)),
                         std::make_shared<const InitialCondition>(std::move(b))};
  return ic;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double draw_theta(ThetaLaw law, Rng& rng) {
  switch (law) {
    case ThetaLaw::exponential:
      return rng.exponential(1.0);
    case ThetaLaw::uniform:
      return rng.uniform();
    case ThetaLaw::constant:
      return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string InitialCondition::name() const {
  return std::visit(overloaded{
                        [](const StationaryPiA&) { return std::string("stationary_pi_a"); },
                        [](const FinitePiD&) { return std::string("finite_pi_d"); },
                        [](const FinitePiAD&) { return std::string("finite_pi_a_d"); },
                        [](const DominatingExp&) { return std::string("dominating_exp"); },
                        [](const ScaledIid&) { return std::string("scaled_iid"); },
                        [](const PerturbedExp&) { return std::string("perturbed_exp"); },
                        [](const AdversarialBlocks&) { return std::string("adversarial_blocks"); },
                        [](const Explicit&) { return std::string("explicit"); },
                        [](const PointwiseMin&) { return std::string("pointwise_min"); },
                    },
                    kind);
}

double adversarial_block_value(std::size_t i) {
  if (i == 0) throw std::invalid_argument("adversarial blocks are indexed from 1");
  auto n = static_cast<std::size_t>(std::llround(std::cbrt(static_cast<double>(i))));
  if (n * n * n == i) return static_cast<double>(n);
  return std::pow(static_cast<double>(i), -2.0 / 3.0);
}

GapVector generate_initial(const InitialCondition& ic, std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("initial condition needs at least one gap");
  GapVector out = std::visit(
      overloaded{
          [&](const InitialCondition::StationaryPiA& k) { return sample_pi_a(k.a, m, rng); },
          [&](const InitialCondition::FinitePiD&) { return sample_pi_finite(m, rng); },
          [&](const InitialCondition::FinitePiAD& k) { return sample_pi_a_finite(k.a, m, rng); },
          [&](const InitialCondition::DominatingExp& k) {
            if (!(k.rate > 0.0)) throw std::invalid_argument("dominating_exp rate must be positive");
            GapVector g(m);
            for (auto& x : g) x = rng.exponential(k.rate);
            return g;
          },
          [&](const InitialCondition::ScaledIid& k) {
            GapVector g(m);
            for (std::size_t i = 1; i <= m; ++i) {
              const double lambda = k.lambda.at(i);
              if (!(lambda > 0.0)) throw std::invalid_argument("scaled_iid lambda must be positive");
              g[i - 1] = lambda * draw_theta(k.theta, rng);
            }
            return g;
          },
          [&](const InitialCondition::PerturbedExp& k) {
            if (!(k.a > 0.0)) throw std::invalid_argument("perturbed_exp needs a > 0");
            if (!(k.beta < 1.0)) throw std::invalid_argument("perturbed_exp needs beta < 1");
            GapVector g(m);
            for (std::size_t i = 1; i <= m; ++i) {
              const double base = pi_a_rate(k.a, i);
              const double rate = base + k.lambda.at(i);
              if (!(rate > 0.0)) throw std::invalid_argument("perturbed_exp rate must be positive");
              if (rate < (1.0 - k.beta) * base) {
                throw std::invalid_argument("perturbed_exp lambda_i below -beta (2 + i a)");
              }
              g[i - 1] = rng.exponential(rate);
            }
            return g;
          },
          [&](const InitialCondition::AdversarialBlocks&) {
            GapVector g(m);
            for (std::size_t i = 1; i <= m; ++i) g[i - 1] = adversarial_block_value(i);
            return g;
          },
          [&](const InitialCondition::Explicit& k) {
            if (k.gaps.size() != m) throw std::invalid_argument("explicit gap vector has wrong length");
            validate_gaps(k.gaps);
            return k.gaps;
          },
          [&](const InitialCondition::PointwiseMin& k) {
            if (!k.first || !k.second) throw std::invalid_argument("pointwise_min needs two conditions");
            GapVector a = generate_initial(*k.first, m, rng);
            const GapVector b = generate_initial(*k.second, m, rng);
            for (std::size_t i = 0; i < m; ++i) a[i] = std::min(a[i], b[i]);
            return a;
          },
      },
      ic.kind);
  return out;
}

std::vector<double> prefix_positions(const GapVector& gaps) {
  std::vector<double> pos(gaps.size() + 1, 0.0);
  for (std::size_t i = 0; i < gaps.size(); ++i) pos[i + 1] = pos[i] + gaps[i];
  return pos;
}

const std::vector<double>& ConditionDiagnostic::series(const std::string& name) const {
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == name) return values[c];
  }
  throw std::out_of_range("no condition series named " + name);
}

namespace {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

ConditionDiagnostic check_conditions(const GapVector& u, const GapVector& reference,
                                     const std::vector<std::size_t>& d_grid,
                                     const ConditionOptions& options) {
  ConditionDiagnostic out;
  out.d_grid = d_grid;
  std::size_t prev = 0;
  for (std::size_t d : d_grid) {
    if (d < 3) throw std::invalid_argument("condition grid entries must be >= 3");
    if (d > u.size() || ((options.which & (kStar | kStarA)) && d > reference.size())) {
      throw std::invalid_argument("condition grid exceeds vector length");
    }
    if (d <= prev && prev != 0) throw std::invalid_argument("condition grid must be increasing");
    prev = d;
  }
  const auto theta = options.theta ? options.theta
                                   : std::function<double(std::size_t)>([](std::size_t d) {
                                       return std::log(static_cast<double>(d));
                                     });

  CompensatedSum min_sum, abs_sum, sum_u, neg_log;
  std::vector<double> star, stara_l1, stara_ratio, d1, d2, d3;
  std::size_t i = 0;
  for (std::size_t d : d_grid) {
    for (; i < d; ++i) {
      if (options.which & kStar) min_sum.add(std::min(u[i], reference[i]));
      if (options.which & kStarA) abs_sum.add(std::abs(reference[i] - u[i]));
      if (options.which & kDjo) {
        sum_u.add(u[i]);
        neg_log.add(u[i] > 0.0 ? std::max(0.0, -std::log(u[i])) : INFINITY);
      }
    }
    const double dd = static_cast<double>(d);
    if (options.which & kStar) star.push_back(min_sum.value() / (std::sqrt(dd) * std::log(dd)));
    if (options.which & kStarA) {
      stara_l1.push_back(std::log(std::log(dd)) / std::log(dd) * abs_sum.value());
      stara_ratio.push_back(u[d - 1] / (dd * reference[d - 1]));
    }
    if (options.which & kDjo) {
      const double scale = std::pow(dd, options.beta) * theta(d);
      d1.push_back(sum_u.value() / scale);
      d2.push_back(neg_log.value() / scale);
      d3.push_back(sum_u.value() /
                   (std::pow(dd, options.beta * options.beta / (1.0 + options.beta)) * theta(d)));
    }
  }
  auto push = [&](const char* name, std::vector<double> v) {
    out.names.emplace_back(name);
    out.values.push_back(std::move(v));
  };
  if (options.which & kStar) push("star", std::move(star));
  if (options.which & kStarA) {
    push("stara_l1", std::move(stara_l1));
    push("stara_ratio", std::move(stara_ratio));
  }
  if (options.which & kDjo) {
    push("d1", std::move(d1));
    push("d2", std::move(d2));
    push("d3", std::move(d3));
  }
  return out;
}

}  // namespace atlas
