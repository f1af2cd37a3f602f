#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qvts {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent streams from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(Rng& rng) { return unit_from_bits(rng()); }

/// Stateless uniform stream: value k of stream s under a fixed key. Lets
/// independent sampling pipelines run in any order with identical results.
class CounterStream {
 public:
  CounterStream(std::uint64_t key, std::uint64_t stream)
      : base_(derive_seed(key, stream)) {}
  double uniform(std::uint64_t k) const {
    return unit_from_bits(mix_seed(base_ + k * 0x9e3779b97f4a7c15ULL));
  }

 private:
  std::uint64_t base_;
};

/// Inverse-CDF draw from non-negative weights summing to one. Falls back to
/// the last positive entry on rounding overrun.
std::size_t sample_index(std::span<const double> probs, double u);

/// Cumulative table over the positive entries of a distribution; O(log n)
/// draws after O(n) setup.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);
  std::size_t sample(double u) const;

 private:
  std::vector<std::size_t> index_;
  std::vector<double> cumulative_;
};

}  // namespace qvts
