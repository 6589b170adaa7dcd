#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ultratree/gtp.hpp"
#include "ultratree/path.hpp"

namespace ultratree {

/// Everything the successive-support solver knows about a tau-space pair.
struct TauProblem {
  double tau1_a = 0.0, tau1_b = 0.0;
  std::vector<CommonCoordinate> common;
  std::vector<Partition> a_parts, b_parts;
  std::vector<double> a, b;
  SupportSolution solution;
  double length = 0.0;
};

/// Solves a pair by splitting it at common partitions and running the
/// support kernel on each segment. A partition below a common one refines
/// it, one above is refined by it, so no incompatibility crosses segments.
inline TauProblem solve_tau(const TauTree& x, const TauTree& y) {
  require_same_taxa(x.taxa_ptr(), y.taxa_ptr());
  TauProblem pr;
  pr.tau1_a = x.tau()[0];
  pr.tau1_b = y.tau()[0];
  pr.common.push_back({Partition::singletons(x.taxon_count()), pr.tau1_a, pr.tau1_b});
  auto px = x.weighted_partitions();
  auto py = y.weighted_partitions();
  for (const auto& [p, w] : px) {
    auto it = std::find_if(py.begin(), py.end(), [&](const auto& q) { return q.first == p; });
    if (it != py.end()) {
      pr.common.push_back({p, w, it->second});
    } else {
      pr.a_parts.push_back(p);
      pr.a.push_back(w);
    }
  }
  for (const auto& [q, v] : py) {
    if (std::none_of(px.begin(), px.end(), [&](const auto& p) { return p.first == q; })) {
      pr.b_parts.push_back(q);
      pr.b.push_back(v);
    }
  }

  auto segment_of = [&](const Partition& p) {
    std::size_t s = 0;
    for (std::size_t c = 1; c < pr.common.size(); ++c)
      if (refines(pr.common[c].partition, p)) ++s;
    return s;
  };
  const std::size_t segments = pr.common.size();
  std::vector<std::size_t> seg_a(pr.a.size()), seg_b(pr.b.size());
  for (std::size_t i = 0; i < pr.a.size(); ++i) seg_a[i] = segment_of(pr.a_parts[i]);
  for (std::size_t j = 0; j < pr.b.size(); ++j) seg_b[j] = segment_of(pr.b_parts[j]);

  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<std::size_t> ia, ib;
    std::vector<double> wa, wb;
    for (std::size_t i = 0; i < pr.a.size(); ++i)
      if (seg_a[i] == s) ia.push_back(i), wa.push_back(pr.a[i]);
    for (std::size_t j = 0; j < pr.b.size(); ++j)
      if (seg_b[j] == s) ib.push_back(j), wb.push_back(pr.b[j]);
    if (ia.empty() && ib.empty()) continue;
    SupportSolution local = geodesic_support(
        wa, wb, [&](std::size_t i, std::size_t j) { return !comparable(pr.a_parts[ia[i]], pr.b_parts[ib[j]]); });
    for (auto& pair : local.pairs) {
      for (auto& i : pair.a) i = ia[i];
      for (auto& j : pair.b) j = ib[j];
      pr.solution.pairs.push_back(std::move(pair));
    }
    for (std::size_t i : local.a_free) pr.solution.a_free.push_back(ia[i]);
    for (std::size_t j : local.b_free) pr.solution.b_free.push_back(ib[j]);
  }
  normalise_support(pr.solution.pairs);

  double common_sq = 0.0;
  for (const auto& c : pr.common) common_sq += (c.source - c.target) * (c.source - c.target);
  pr.length = support_length(pr.solution, pr.a, pr.b, common_sq);
  return pr;
}

/// Arbitrary but fixed order on trees, used to make distances exactly symmetric.
inline bool canonical_less(const TauTree& x, const TauTree& y) {
  if (x.topology() != y.topology()) return x.topology() < y.topology();
  return x.tau() < y.tau();
}

inline double tau_distance(const TauTree& x, const TauTree& y) {
  return canonical_less(y, x) ? solve_tau(y, x).length : solve_tau(x, y).length;
}

inline TauTree tau_point(const TauProblem& pr, const TaxaPtr& taxa, double lambda) {
  std::vector<double> a_now, b_now;
  support_point(pr.solution, pr.a, pr.b, lambda, a_now, b_now);
  std::vector<std::pair<Partition, double>> weighted;
  for (std::size_t c = 1; c < pr.common.size(); ++c) {
    const auto& cc = pr.common[c];
    weighted.emplace_back(cc.partition, (1.0 - lambda) * cc.source + lambda * cc.target);
  }
  for (std::size_t i = 0; i < a_now.size(); ++i) weighted.emplace_back(pr.a_parts[i], a_now[i]);
  for (std::size_t j = 0; j < b_now.size(); ++j) weighted.emplace_back(pr.b_parts[j], b_now[j]);
  return tau_tree_from_weighted(taxa, (1.0 - lambda) * pr.tau1_a + lambda * pr.tau1_b, std::move(weighted));
}

/// The unique tau-space geodesic, with one waypoint per support breakpoint.
inline GeodesicPath<TauTree> tau_geodesic(const TauTree& x, const TauTree& y) {
  TauProblem pr = solve_tau(x, y);
  GeodesicPath<TauTree> path;
  path.space = Space::tau;
  path.common = pr.common;
  SupportSets sets;
  std::vector<double> lambdas{0.0};
  for (const auto& pair : pr.solution.pairs) {
    std::vector<Partition> sa, sb;
    for (std::size_t i : pair.a) sa.push_back(pr.a_parts[i]);
    for (std::size_t j : pair.b) sb.push_back(pr.b_parts[j]);
    sets.emplace_back(std::move(sa), std::move(sb));
    // Breakpoints are kept even when they sit within rounding of an
    // endpoint: the snapped waypoint is what makes the adjacent legs cell mates.
    const double l = pair.breakpoint();
    if ((lambdas.size() == 1 || l > lambdas.back() + kRatioMergeTolerance) && l > 0.0 && l < 1.0) lambdas.push_back(l);
  }
  lambdas.push_back(1.0);
  path.support = std::move(sets);

  path.waypoints.push_back(x);
  for (std::size_t k = 1; k + 1 < lambdas.size(); ++k) path.waypoints.push_back(tau_point(pr, x.taxa_ptr(), lambdas[k]));
  path.waypoints.push_back(y);
  for (std::size_t k = 1; k < lambdas.size(); ++k) path.leg_lengths.push_back((lambdas[k] - lambdas[k - 1]) * pr.length);
  return path;
}

/// True iff the geodesic passes through the point where every non-common
/// coordinate vanishes at once.
inline bool is_cone_geodesic_tau(const TauTree& x, const TauTree& y) {
  TauProblem pr = solve_tau(x, y);
  return pr.solution.pairs.size() == 1 && pr.solution.a_free.empty() && pr.solution.b_free.empty();
}

}  // namespace ultratree
