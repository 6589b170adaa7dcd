#pragma once

#include <random>
#include <string>

#include "ultratree/ultratree.hpp"

namespace testing_util {

inline ultratree::TTree ranked(const std::string& text) { return ultratree::parse_ranked(text); }
inline ultratree::TauTree ranked_tau(const std::string& text) { return ultratree::to_tau(ultratree::parse_ranked(text)); }

inline ultratree::TauTree random_tau(std::size_t n, std::uint64_t seed) {
  return ultratree::sample_tree(ultratree::numbered_taxa(n), seed);
}

/// Random fully resolved tree with unquantised exponential intervals.
inline ultratree::TauTree random_tau(const ultratree::TaxaPtr& taxa, std::mt19937_64& rng) {
  auto chain = ultratree::sample_topology(taxa, rng);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> tau(taxa->size() - 1);
  for (double& x : tau) x = e(rng) + 1e-3;
  return ultratree::TauTree(std::move(chain), std::move(tau));
}

/// Applies a taxon relabelling (taxon i becomes perm[i]) to a tau-space tree.
inline ultratree::TauTree relabel(const ultratree::TauTree& x, const std::vector<std::size_t>& perm) {
  using namespace ultratree;
  auto taxa = x.taxa_ptr();
  std::vector<Partition> parts;
  for (const auto& p : x.topology().partitions()) {
    std::vector<TaxonMask> blocks;
    for (TaxonMask b : p.blocks()) {
      TaxonMask nb = 0;
      for (std::size_t i = 0; i < taxa->size(); ++i)
        if (b & bit(i)) nb |= bit(perm[i]);
      blocks.push_back(nb);
    }
    parts.emplace_back(blocks);
  }
  return TauTree(PartitionChain(taxa, parts), x.tau());
}

}  // namespace testing_util
