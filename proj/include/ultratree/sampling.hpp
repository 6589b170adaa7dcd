#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ultratree/trees.hpp"

namespace ultratree {

enum class IntervalDist { exponential, uniform };

namespace detail {

// Interval lengths are rounded to a 2^-32 grid so that prefix sums (tau <-> t)
// are exact in double precision for every sampled tree.
inline double quantize_interval(double x) {
  constexpr double scale = 4294967296.0;
  double q = std::round(x * scale) / scale;
  return q > 0.0 ? q : 1.0 / scale;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed for an independent sub-stream, a pure function of (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform ranked topology by sequential uniform pair merging.
template <class Rng>
PartitionChain sample_topology(const TaxaPtr& taxa, Rng& rng) {
  Partition current = Partition::singletons(taxa->size());
  std::vector<Partition> parts;
  while (current.block_count() > 1) {
    const std::size_t k = current.block_count();
    std::uniform_int_distribution<std::size_t> pick(0, k * (k - 1) / 2 - 1);
    std::size_t idx = pick(rng);
    std::size_t i = 0;
    while (idx >= k - 1 - i) {
      idx -= k - 1 - i;
      ++i;
    }
    std::size_t j = i + 1 + idx;
    auto blocks = current.blocks();
    current = current.merged(blocks[i], blocks[j]);
    parts.push_back(current);
  }
  return PartitionChain(taxa, std::move(parts));
}

template <class Rng>
TauTree sample_tree(const TaxaPtr& taxa, Rng& rng, IntervalDist dist = IntervalDist::exponential) {
  PartitionChain topology = sample_topology(taxa, rng);
  std::vector<double> tau(taxa->size() - 1);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double& x : tau) {
    double raw = dist == IntervalDist::exponential ? expo(rng) : 1.0 - unif(rng);  // (0, 1]
    x = detail::quantize_interval(raw);
  }
  return TauTree(std::move(topology), std::move(tau));
}

inline TauTree sample_tree(const TaxaPtr& taxa, std::uint64_t seed, IntervalDist dist = IntervalDist::exponential) {
  std::mt19937_64 rng(seed);
  return sample_tree(taxa, rng, dist);
}

}  // namespace ultratree
