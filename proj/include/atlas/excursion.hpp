#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "atlas/coupling.hpp"

namespace atlas {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Default "hits zero" slack: 10 x the default solver tolerance.
inline constexpr double kDefaultZeroThreshold = 1e-11;

/// Excursions of Delta Z_k between an epsilon-crossing and the return to zero
/// after the chain of coordinate-wise zero hits k, k-1, ..., 1.
struct ExcursionRecord {
  std::size_t k = 1;
  double epsilon = 0.1;
  double horizon = 0.0;
  std::vector<double> sigma_times;           // sigma_1, sigma_2, ... (finite ones)
  std::vector<std::vector<double>> t_chains; // T^k_1..T^k_k for each odd sigma
  std::size_t n_t = 0;
  std::vector<double> decrements;            // per completed excursion

  std::size_t completed() const { return decrements.size(); }
  double opening(std::size_t j) const { return sigma_times.at(2 * j); }
  double closing(std::size_t j) const { return sigma_times.at(2 * j + 1); }
  /// sigma_{2j+2} - sigma_{2j+1} for completed excursions.
  std::vector<double> lengths() const;
};

/// T^k_j(s), j = 1..k, on the sample grid: T^k_0 = s and T^k_j is the first
/// sample time >= T^k_{j-1} with Delta Z_{k-j+1} <= zero_threshold.
/// Unattained entries are kNever. Throws if s is beyond the record.
std::vector<double> t_chain(const DeltaPath& path, std::size_t k, double s,
                            double zero_threshold = kDefaultZeroThreshold);

ExcursionRecord detect_excursions(const DeltaPath& path, std::size_t k, double epsilon, double horizon,
                                  double zero_threshold = kDefaultZeroThreshold);

/// 48 D^2 k (k+1)^2 log T.
double excursion_length_threshold(double domination, std::size_t k, double horizon);

/// Smallest S >= e such that the length threshold at T is <= T for every T >= S.
double excursion_time_floor(double domination, std::size_t k);

struct TailReport {
  double threshold = 0.0;
  double time_floor = 0.0;
  bool horizon_meets_floor = false;
  std::size_t runs = 0;
  std::size_t completed = 0;
  std::size_t long_completed = 0;
  std::size_t censored = 0;  // excursions still open at the horizon
  double excursion_fraction = 0.0;  // long / completed, 0 when none completed
  double run_frequency = 0.0;       // runs with a long completed excursion / runs
  double run_frequency_se = 0.0;
  std::size_t max_n_t = 0;
  double prob_nt_exceeds = 0.0;  // empirical P(N_T > max_n_t)
  /// P(N_T > n) + 5 k n T^-2 evaluated at n = max_n_t.
  double bound = 0.0;
};

TailReport excursion_tail_stats(std::span<const ExcursionRecord> records, double domination,
                                std::size_t k, double horizon);

}  // namespace atlas
