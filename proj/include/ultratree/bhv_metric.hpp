#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "ultratree/gtp.hpp"
#include "ultratree/tau_metric.hpp"
#include "ultratree/trees.hpp"

namespace ultratree {

/// Internal clade -> edge length (external edges are left out).
using SplitWeights = std::map<TaxonMask, double>;

inline bool clades_compatible(TaxonMask x, TaxonMask y) noexcept {
  return (x & y) == 0 || (x & y) == x || (x & y) == y;
}

namespace detail {

/// Rank at which each internal clade is created and the rank of its parent.
inline std::vector<std::pair<TaxonMask, std::pair<std::size_t, std::size_t>>> clade_ranks(const PartitionChain& chain) {
  std::vector<std::pair<TaxonMask, std::pair<std::size_t, std::size_t>>> out;
  const std::size_t n = chain.taxon_count();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Partition& p = chain.rank(i);
    const Partition prev = chain.rank(i - 1);
    TaxonMask created = 0;
    for (TaxonMask b : p.blocks())
      if (!prev.has_block(b)) created = b;
    std::size_t j = i + 1;
    while (chain.rank(j).has_block(created)) ++j;
    out.push_back({created, {i, j}});
  }
  return out;
}

}  // namespace detail

inline SplitWeights splits_with_lengths(const TauTree& tree) {
  if (!tree.fully_resolved()) throw Error(ErrorKind::NotFullyResolved, "BHV coordinates need a fully resolved tree");
  SplitWeights out;
  const auto& tau = tree.tau();
  for (const auto& [clade, ranks] : detail::clade_ranks(tree.topology())) {
    double len = 0.0;
    for (std::size_t k = ranks.first + 1; k <= ranks.second; ++k) len += tau[k - 1];
    out[clade] = len;
  }
  return out;
}

/// Inverse of splits_with_lengths given the ranking and tau_1.
inline TauTree tau_from_splits(const PartitionChain& chain, const SplitWeights& splits, double tau1) {
  const std::size_t n = chain.taxon_count();
  auto ranks = detail::clade_ranks(chain);
  // Depth below the root of the node at each rank, filled from the top.
  std::vector<double> depth(n, 0.0);
  for (auto it = ranks.rbegin(); it != ranks.rend(); ++it) {
    auto found = splits.find(it->first);
    if (found == splits.end()) throw Error(ErrorKind::InvalidArgument, "split weights do not match the ranking");
    depth[it->second.first] = depth[it->second.second] + found->second;
  }
  const double root = tau1 + (n > 2 ? depth[1] : 0.0);
  std::vector<double> t(n - 1);
  for (std::size_t r = 1; r < n; ++r) t[r - 1] = root - depth[r];
  t[0] = tau1;
  std::vector<double> tau(n - 1);
  tau[0] = t[0];
  for (std::size_t i = 1; i < t.size(); ++i) tau[i] = t[i] - t[i - 1];
  return TauTree(chain, std::move(tau));
}

struct BhvProblem {
  std::vector<TaxonMask> a_clades, b_clades;
  std::vector<double> a, b;
  double common_sq = 0.0;
  SupportSolution solution;
  double length = 0.0;
};

inline BhvProblem solve_bhv(const TauTree& x, const TauTree& y) {
  require_same_taxa(x.taxa_ptr(), y.taxa_ptr());
  SplitWeights sx = splits_with_lengths(x);
  SplitWeights sy = splits_with_lengths(y);
  BhvProblem pr;
  for (const auto& [c, w] : sx) {
    auto it = sy.find(c);
    if (it != sy.end()) {
      pr.common_sq += (w - it->second) * (w - it->second);
    } else {
      pr.a_clades.push_back(c);
      pr.a.push_back(w);
    }
  }
  for (const auto& [c, w] : sy) {
    if (!sx.count(c)) {
      pr.b_clades.push_back(c);
      pr.b.push_back(w);
    }
  }
  pr.solution = geodesic_support(
      pr.a, pr.b, [&](std::size_t i, std::size_t j) { return !clades_compatible(pr.a_clades[i], pr.b_clades[j]); });
  normalise_support(pr.solution.pairs);
  pr.length = support_length(pr.solution, pr.a, pr.b, pr.common_sq);
  return pr;
}

inline double bhv_distance(const TauTree& x, const TauTree& y) {
  return canonical_less(y, x) ? solve_bhv(y, x).length : solve_bhv(x, y).length;
}

inline bool is_cone_geodesic_bhv(const TauTree& x, const TauTree& y) {
  BhvProblem pr = solve_bhv(x, y);
  return pr.solution.pairs.size() == 1 && pr.solution.a_free.empty() && pr.solution.b_free.empty();
}

}  // namespace ultratree
