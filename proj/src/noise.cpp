#include "atlas/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace atlas {

namespace {

constexpr std::uint64_t kSamplingChannel = 0xA71A'5000'0000'0001ULL;

std::uint32_t lo(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
std::uint32_t hi(std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); }

// splitmix64 finalizer, used to derive child stream ids.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t channel) {
  std::seed_seq seq{lo(seed), hi(seed), lo(stream_id), hi(stream_id), lo(channel), hi(channel)};
  engine_.seed(seq);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() { return normal_(engine_); }

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

NoiseStream NoiseStream::silent() {
  NoiseStream s(0, 0);
  s.silent_ = true;
  return s;
}

NoiseStream NoiseStream::child(std::uint64_t index) const {
  NoiseStream c(seed_, mix(stream_id_ ^ mix(index + 1)));
  c.silent_ = silent_;
  return c;
}

Rng NoiseStream::rank_channel(std::size_t rank) const {
  return Rng(seed_, stream_id_, static_cast<std::uint64_t>(rank));
}

Rng NoiseStream::sampling_channel() const { return Rng(seed_, stream_id_, kSamplingChannel); }

IncrementSource::IncrementSource(const NoiseStream& noise, std::size_t num_ranks)
    : num_ranks_(num_ranks), silent_(noise.is_silent()) {
  if (!silent_) {
    channels_.reserve(num_ranks);
    for (std::size_t r = 0; r < num_ranks; ++r) channels_.push_back(noise.rank_channel(r));
  }
}

void IncrementSource::next(std::span<double> out, double scale) {
  if (out.size() != num_ranks_) throw std::invalid_argument("increment buffer has wrong length");
  ++position_;
  if (silent_) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (std::size_t r = 0; r < num_ranks_; ++r) out[r] = scale * channels_[r].gaussian();
}

}  // namespace atlas
