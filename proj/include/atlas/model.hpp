#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "atlas/noise.hpp"

namespace atlas {

/// Gap vector Z = (Z_1, ..., Z_m); entry i-1 holds Z_i. Entries are >= 0.
using GapVector = std::vector<double>;

/// Throws std::invalid_argument if any gap is negative or not finite.
void validate_gaps(const GapVector& gaps);

/// A finite rank-based diffusion with m+1 particles: rank j has drift a_j and
/// diffusion coefficient b_j. The Atlas preset is a = (gamma, 0, ..., 0), b = 1.
struct ModelSpec {
  std::size_t num_particles = 0;
  std::vector<double> rank_drifts;
  std::vector<double> rank_diffusions;
  double bottom_drift_gamma = 1.0;

  static ModelSpec atlas(std::size_t num_particles, double gamma = 1.0);

  std::size_t num_gaps() const { return num_particles - 1; }
  /// Copy with a_0 (and gamma) replaced.
  ModelSpec with_bottom_drift(double gamma) const;
  void validate() const;
};

/// Rates of the stationary product-exponential gap law of a finite model with
/// unit diffusions: rate_i = -(R^{-1} mu)_i where mu_i = a_i - a_{i-1}.
/// Throws if the diffusions are not all 1 or some rate is non-positive.
std::vector<double> stationary_gap_rates(const ModelSpec& spec);

// Stationary laws --------------------------------------------------------

/// pi_a restricted to m gaps: gap i ~ Exp(2 + i a).
GapVector sample_pi_a(double a, std::size_t m, Rng& rng);
/// pi^(d): gap i ~ Exp(2 (1 - i/(d+1))).
GapVector sample_pi_finite(std::size_t d, Rng& rng);
/// pi^{a,(d)}: gap i ~ Exp((2 + i a)(1 - i/(d+1))).
GapVector sample_pi_a_finite(double a, std::size_t d, Rng& rng);

double pi_a_rate(double a, std::size_t i);
double pi_finite_rate(std::size_t d, std::size_t i);
double pi_a_finite_rate(double a, std::size_t d, std::size_t i);

// Initial conditions ------------------------------------------------------

/// Deterministic sequence lambda_i, i >= 1.
struct LambdaSequence {
  enum class Kind { constant, power, i_over_loglog };
  Kind kind = Kind::constant;
  double scale = 1.0;
  double exponent = 0.0;  // used by `power`: scale * i^exponent

  /// constant: scale; power: scale * i^exponent;
  /// i_over_loglog: scale * i / log(log(e + i)).
  double at(std::size_t i) const;
};

enum class ThetaLaw { exponential, uniform, constant };

struct InitialCondition {
  struct StationaryPiA { double a = 0.0; };
  struct FinitePiD {};
  struct FinitePiAD { double a = 1.0; };
  struct DominatingExp { double rate = 1.0; };
  struct ScaledIid {
    LambdaSequence lambda;
    ThetaLaw theta = ThetaLaw::exponential;
  };
  struct PerturbedExp {
    double a = 1.0;
    LambdaSequence lambda;
    double beta = 0.9;
  };
  struct AdversarialBlocks {};
  struct Explicit { GapVector gaps; };
  struct PointwiseMin {
    std::shared_ptr<const InitialCondition> first;
    std::shared_ptr<const InitialCondition> second;
  };

  using Kind = std::variant<StationaryPiA, FinitePiD, FinitePiAD, DominatingExp, ScaledIid,
                            PerturbedExp, AdversarialBlocks, Explicit, PointwiseMin>;
  Kind kind = StationaryPiA{};

  static InitialCondition pointwise_min(InitialCondition a, InitialCondition b);
  std::string name() const;
};

/// One draw of m initial gaps. Deterministic kinds ignore `rng`.
GapVector generate_initial(const InitialCondition& ic, std::size_t m, Rng& rng);

/// Adversarial block sequence: U_i = i^{-2/3} except U_{n^3} = n (n >= 1).
double adversarial_block_value(std::size_t i);

/// Particle positions (0, g_1, g_1 + g_2, ...) of length m + 1.
std::vector<double> prefix_positions(const GapVector& gaps);

// Condition diagnostics ---------------------------------------------------

enum ConditionSet : unsigned {
  kStar = 1u << 0,   // (sqrt(d) log d)^-1 sum U_i ^ V_i
  kStarA = 1u << 1,  // (log log d / log d) sum |V_i - U_i| and U_d / (d V_d)
  kDjo = 1u << 2,    // three normalized sums with exponent beta and scale theta
};

struct ConditionOptions {
  unsigned which = kStar;
  double beta = 1.0;
  /// Scale sequence theta(d); defaults to log d.
  std::function<double(std::size_t)> theta;
};

struct ConditionDiagnostic {
  std::vector<std::size_t> d_grid;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[c][g] for names[c], d_grid[g]

  const std::vector<double>& series(const std::string& name) const;
};

ConditionDiagnostic check_conditions(const GapVector& u, const GapVector& reference,
                                     const std::vector<std::size_t>& d_grid,
                                     const ConditionOptions& options);

}  // namespace atlas
