#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace atlas {

/// One reproducible random stream. Uniforms are built from the top 53 bits of
/// the engine output so exponential draws are bit-stable across platforms.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t channel);

  double uniform();  // [0, 1)
  double gaussian();
  /// Inverse-CDF exponential draw with the given rate.
  double exponential(double rate);

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

/// Seeded, splittable noise source. A (seed, stream_id) pair names a family of
/// independent channels; channel r is the Brownian driver of rank r, so two
/// runs built from the same NoiseStream replay identical rank increments.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id);

  /// A stream whose increments are identically zero.
  static NoiseStream silent();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  bool is_silent() const { return silent_; }

  /// Derive an independent stream (e.g. ensemble member `index`).
  NoiseStream child(std::uint64_t index) const;

  Rng rank_channel(std::size_t rank) const;
  /// Channel reserved for drawing initial conditions.
  Rng sampling_channel() const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  bool silent_ = false;
};

/// Per-rank Gaussian increments, one channel per rank. `position` counts the
/// number of steps drawn so far.
class IncrementSource {
 public:
  IncrementSource(const NoiseStream& noise, std::size_t num_ranks);

  /// Fill `out` (length num_ranks) with N(0, 1) * scale.
  void next(std::span<double> out, double scale);

  std::size_t num_ranks() const { return num_ranks_; }
  std::uint64_t position() const { return position_; }

 private:
  std::size_t num_ranks_;
  bool silent_;
  std::vector<Rng> channels_;
  std::uint64_t position_ = 0;
};

}  // namespace atlas
