#include "atlas/excursion.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace atlas {

namespace {

using Index = std::optional<std::size_t>;

Index first_at_or_below(const DeltaPath& path, std::size_t coord, std::size_t from, std::size_t end,
                        double threshold) {
  for (std::size_t s = from; s < end; ++s) {
    if (path.values[s][coord] <= threshold) return s;
  }
  return std::nullopt;
}

Index first_at_or_above(const DeltaPath& path, std::size_t coord, std::size_t from, std::size_t end,
                        double threshold) {
  for (std::size_t s = from; s < end; ++s) {
    if (path.values[s][coord] >= threshold) return s;
  }
  return std::nullopt;
}

void check_k(const DeltaPath& path, std::size_t k) {
  if (k == 0 || k > path.num_coordinates()) throw std::invalid_argument("k must be in 1..number of gaps");
}

// Chain indices T^k_1..T^k_k starting from sample `start`; nullopt once unattained.
std::vector<Index> chain_indices(const DeltaPath& path, std::size_t k, std::size_t start, std::size_t end,
                                 double zero_threshold) {
  std::vector<Index> chain(k);
  Index current = start;
  for (std::size_t j = 1; j <= k; ++j) {
    if (current) current = first_at_or_below(path, k - j, *current, end, zero_threshold);
    chain[j - 1] = current;
  }
  return chain;
}

}  // namespace

std::vector<double> ExcursionRecord::lengths() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < completed(); ++j) out.push_back(closing(j) - opening(j));
  return out;
}

std::vector<double> t_chain(const DeltaPath& path, std::size_t k, double s, double zero_threshold) {
  check_k(path, k);
  std::size_t start = 0;
  while (start < path.times.size() && path.times[start] < s) ++start;
  if (start == path.times.size()) throw std::invalid_argument("chain start is beyond the record");
  const auto idx = chain_indices(path, k, start, path.times.size(), zero_threshold);
  std::vector<double> out(k, kNever);
  for (std::size_t j = 0; j < k; ++j) {
    if (idx[j]) out[j] = path.times[*idx[j]];
  }
  return out;
}

ExcursionRecord detect_excursions(const DeltaPath& path, std::size_t k, double epsilon, double horizon,
                                  double zero_threshold) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  ExcursionRecord rec;
  rec.k = k;
  rec.epsilon = epsilon;
  rec.horizon = horizon;
  if (path.times.empty()) return rec;
  check_k(path, k);

  std::size_t end = 0;
  while (end < path.times.size() && path.times[end] <= horizon) ++end;

  const std::size_t coord = k - 1;
  Index open = first_at_or_above(path, coord, 0, end, epsilon);
  while (open) {
    rec.sigma_times.push_back(path.times[*open]);
    ++rec.n_t;
    const auto chain = chain_indices(path, k, *open, end, zero_threshold);
    std::vector<double> chain_times(k, kNever);
    for (std::size_t j = 0; j < k; ++j) {
      if (chain[j]) chain_times[j] = path.times[*chain[j]];
    }
    rec.t_chains.push_back(std::move(chain_times));
    if (!chain.back()) break;
    const Index close = first_at_or_below(path, coord, *chain.back(), end, zero_threshold);
    if (!close) break;
    rec.sigma_times.push_back(path.times[*close]);
    rec.decrements.push_back(path.l1(*close) - path.l1(*open));
    open = first_at_or_above(path, coord, *close, end, epsilon);
  }
  return rec;
}

double excursion_length_threshold(double domination, std::size_t k, double horizon) {
  const double kk = static_cast<double>(k);
  return 48.0 * domination * domination * kk * (kk + 1.0) * (kk + 1.0) * std::log(horizon);
}

double excursion_time_floor(double domination, std::size_t k) {
  const double c = excursion_length_threshold(domination, k, std::numbers::e);  // c * log e = c
  // T / log T is minimised at T = e with value e, so c <= e makes every T >= e admissible.
  if (c <= std::numbers::e) return std::numbers::e;
  // Largest root of T = c log T lies above c; Newton on f(T) = T - c log T from the right.
  double t = 2.0 * c * std::log(c);
  for (int i = 0; i < 200; ++i) {
    const double next = t - (t - c * std::log(t)) / (1.0 - c / t);
    if (std::abs(next - t) <= 1e-12 * t) {
      t = next;
      break;
    }
    t = next;
  }
  return t;
}

TailReport excursion_tail_stats(std::span<const ExcursionRecord> records, double domination,
                                std::size_t k, double horizon) {
  TailReport rep;
  rep.threshold = excursion_length_threshold(domination, k, horizon);
  rep.time_floor = excursion_time_floor(domination, k);
  rep.horizon_meets_floor = horizon >= rep.time_floor;
  rep.runs = records.size();
  std::size_t runs_with_long = 0;
  for (const auto& r : records) {
    bool any_long = false;
    for (double len : r.lengths()) {
      ++rep.completed;
      if (len > rep.threshold) {
        ++rep.long_completed;
        any_long = true;
      }
    }
    rep.censored += r.n_t - r.completed();
    if (any_long) ++runs_with_long;
    rep.max_n_t = std::max(rep.max_n_t, r.n_t);
  }
  if (rep.completed > 0) {
    rep.excursion_fraction = static_cast<double>(rep.long_completed) / static_cast<double>(rep.completed);
  }
  if (rep.runs > 0) {
    const double n = static_cast<double>(rep.runs);
    rep.run_frequency = static_cast<double>(runs_with_long) / n;
    rep.run_frequency_se = std::sqrt(rep.run_frequency * (1.0 - rep.run_frequency) / n);
    std::size_t exceed = 0;
    for (const auto& r : records) exceed += r.n_t > rep.max_n_t ? 1 : 0;
    rep.prob_nt_exceeds = static_cast<double>(exceed) / n;
  }
  rep.bound = rep.prob_nt_exceeds +
              5.0 * static_cast<double>(k) * static_cast<double>(rep.max_n_t) / (horizon * horizon);
  return rep;
}

}  // namespace atlas
