#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ultratree/gallery.hpp"
#include "ultratree/path.hpp"

namespace ultratree {

struct ConePathResult {
  double star_height = 0.0;
  double length = 0.0;
};

namespace detail {

inline double cone_objective(const std::vector<double>& t, const std::vector<double>& r, double h) {
  double a = 0.0, b = 0.0;
  for (double x : t) a += (h - x) * (h - x);
  for (double x : r) b += (h - x) * (h - x);
  return std::sqrt(a) + std::sqrt(b);
}

inline bool is_star(const std::vector<double>& t) {
  return std::all_of(t.begin(), t.end(), [&](double x) { return x == t.front(); });
}

inline TTree star_tree(const PartitionChain& any_chain, double h) {
  return TTree(any_chain, std::vector<double>(any_chain.size(), h));
}

}  // namespace detail

/// Shortest path through a star tree: minimises
/// sqrt(sum (h - t_i)^2) + sqrt(sum (h - r_j)^2) over h.
inline ConePathResult cone_path(const TTree& a, const TTree& b) {
  require_same_taxa(a.taxa_ptr(), b.taxa_ptr());
  const auto& t = a.t();
  const auto& r = b.t();
  ConePathResult res;
  if (detail::is_star(t) && detail::is_star(r)) {
    // Every h between the two heights is optimal; report the midpoint.
    res.star_height = 0.5 * (t.front() + r.front());
    res.length = std::abs(t.front() - r.front()) * std::sqrt(static_cast<double>(t.size()));
    return res;
  }
  double lo = std::min(*std::min_element(t.begin(), t.end()), *std::min_element(r.begin(), r.end()));
  double hi = std::max(*std::max_element(t.begin(), t.end()), *std::max_element(r.begin(), r.end()));
  // Bisection on the (sub)derivative of the convex objective.
  auto slope = [&](double h) {
    double na = 0.0, nb = 0.0, da = 0.0, db = 0.0;
    for (double x : t) na += (h - x) * (h - x), da += h - x;
    for (double x : r) nb += (h - x) * (h - x), db += h - x;
    return (na > 0.0 ? da / std::sqrt(na) : 0.0) + (nb > 0.0 ? db / std::sqrt(nb) : 0.0);
  };
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (slope(mid) > 0.0 ? hi : lo) = mid;
  }
  const double h = detail::cone_objective(t, r, lo) <= detail::cone_objective(t, r, hi) ? lo : hi;
  res.star_height = h;
  res.length = detail::cone_objective(t, r, h);
  return res;
}

inline GeodesicPath<TTree> cone_geodesic_path(const TTree& a, const TTree& b) {
  ConePathResult c = cone_path(a, b);
  GeodesicPath<TTree> p;
  p.space = Space::t;
  TTree star = detail::star_tree(a.topology(), c.star_height);
  p.waypoints = {a, star, b};
  p.leg_lengths = {t_leg_length(a, star), t_leg_length(star, b)};
  return p;
}

/// Sum of Euclidean leg lengths; consecutive trees must share a closed simplex.
inline double path_length(const std::vector<TTree>& waypoints) {
  double s = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    require_same_taxa(waypoints[i - 1].taxa_ptr(), waypoints[i].taxa_ptr());
    if (!t_cell_mates(waypoints[i - 1], waypoints[i])) {
      throw Error(ErrorKind::NotCellMates, "waypoints " + std::to_string(i - 1) + " and " + std::to_string(i) +
                                               " share no closed simplex");
    }
    s += t_leg_length(waypoints[i - 1], waypoints[i]);
  }
  return s;
}

struct OptimizedPath {
  std::vector<TTree> waypoints;
  double length = 0.0;
};

namespace detail {

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline bool chain_holds(const PartitionChain& chain, const TTree& x) {
  for (const auto& tp : x.timed_partitions())
    if (!chain.contains(tp.partition)) return false;
  return true;
}

/// Facet index crossed between two facet-adjacent chains, if they are.
inline std::optional<std::size_t> shared_facet(const PartitionChain& p, const PartitionChain& q) {
  std::optional<std::size_t> facet;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.partitions()[i] == q.partitions()[i]) continue;
    if (facet || i + 1 >= p.size()) return std::nullopt;
    facet = i + 1;
  }
  return facet;
}

inline OptimizedPath gallery_to_trees(const std::vector<PartitionChain>& cells, const GalleryPath& g) {
  OptimizedPath out;
  for (std::size_t j = 0; j < g.points.size(); ++j) {
    // Point j (0 < j < last) lies on the facet shared by cells j-1 and j.
    const PartitionChain& cell = cells[j == 0 ? 0 : std::min(j, cells.size()) - 1];
    std::vector<double> t(g.points[j].data(), g.points[j].data() + g.points[j].size());
    t[0] = std::max(t[0], 0.0);
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::max(t[i], t[i - 1]);
    TTree tree(cell, std::move(t));
    if (!out.waypoints.empty() && same_point(out.waypoints.back(), tree)) continue;
    out.waypoints.push_back(std::move(tree));
  }
  out.length = path_length(out.waypoints);
  return out;
}

}  // namespace detail

/// Shortest path crossing the shared facets of a fixed simplex sequence.
inline OptimizedPath optimize_path(const TTree& a, const TTree& b, const std::vector<PartitionChain>& seq) {
  require_same_taxa(a.taxa_ptr(), b.taxa_ptr());
  if (seq.empty()) throw Error(ErrorKind::InvalidSequence, "empty simplex sequence");
  if (!detail::chain_holds(seq.front(), a) || !detail::chain_holds(seq.back(), b)) {
    throw Error(ErrorKind::InvalidSequence, "sequence does not start at the source or end at the target simplex");
  }
  std::vector<std::size_t> facets;
  for (std::size_t j = 1; j < seq.size(); ++j) {
    require_same_taxa(seq[j - 1].taxa_ptr(), seq[j].taxa_ptr());
    auto f = detail::shared_facet(seq[j - 1], seq[j]);
    if (!f) throw Error(ErrorKind::InvalidSequence, "simplices " + std::to_string(j - 1) + " and " + std::to_string(j) + " share no facet");
    facets.push_back(*f);
  }
  CellGeometry geo = t_geometry(a.t().size());
  GalleryPath g = optimize_gallery(geo, detail::to_eigen(t_coordinates_on(a, seq.front())),
                                   detail::to_eigen(t_coordinates_on(b, seq.back())), facets);
  return detail::gallery_to_trees(seq, g);
}

inline std::size_t default_max_hops(std::size_t n) { return n <= 4 ? 6 : 8; }

inline bool canonical_less(const TTree& x, const TTree& y) {
  if (x.topology() != y.topology()) return x.topology() < y.topology();
  return x.t() < y.t();
}

namespace detail {

inline GeodesicPath<TTree> t_geodesic_ordered(const TTree& a, const TTree& b, std::size_t hops, std::size_t budget) {
  GeodesicPath<TTree> cone = cone_geodesic_path(a, b);
  const double cone_len = cone.length();
  CellGeometry geo = t_geometry(a.t().size());
  auto found = search_galleries(geo, a.topology(), detail::to_eigen(a.t()), b.topology(), detail::to_eigen(b.t()), hops,
                                cone_len, budget);
  if (!found) return cone;
  OptimizedPath best = detail::gallery_to_trees(found->sequence.cells, found->path);
  if (best.length >= cone_len) return cone;
  GeodesicPath<TTree> path;
  path.space = Space::t;
  for (std::size_t i = 1; i < best.waypoints.size(); ++i)
    path.leg_lengths.push_back(t_leg_length(best.waypoints[i - 1], best.waypoints[i]));
  path.waypoints = std::move(best.waypoints);
  return path;
}

}  // namespace detail

/// Geodesic by brute force over simplex sequences of at most max_hops facet
/// crossings, compared against the best cone path. The search runs in a
/// fixed endpoint order so that lengths are exactly symmetric.
inline GeodesicPath<TTree> t_geodesic(const TTree& a, const TTree& b, std::optional<std::size_t> max_hops = std::nullopt,
                                      std::size_t budget = kDefaultSearchBudget) {
  require_same_taxa(a.taxa_ptr(), b.taxa_ptr());
  if (!a.fully_resolved() || !b.fully_resolved()) {
    throw Error(ErrorKind::EndpointNotResolved, "geodesic endpoints need pairwise distinct node times");
  }
  const std::size_t hops = max_hops.value_or(default_max_hops(a.taxon_count()));
  if (!canonical_less(b, a)) return detail::t_geodesic_ordered(a, b, hops, budget);
  GeodesicPath<TTree> path = detail::t_geodesic_ordered(b, a, hops, budget);
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  std::reverse(path.leg_lengths.begin(), path.leg_lengths.end());
  return path;
}

inline double t_distance(const TTree& a, const TTree& b, std::optional<std::size_t> max_hops = std::nullopt) {
  return canonical_less(b, a) ? t_geodesic(b, a, max_hops).length() : t_geodesic(a, b, max_hops).length();
}

inline constexpr double kConeTolerance = 1e-9;

inline bool is_cone_geodesic_t(const TTree& a, const TTree& b, std::optional<std::size_t> max_hops = std::nullopt) {
  const double cone = cone_path(a, b).length;
  return cone <= t_distance(a, b, max_hops) + kConeTolerance;
}

// ---------------------------------------------------------------------------
// Non-cone witnesses.

struct NonConeWitness {
  std::size_t s = 0, k = 0;  // taxon indices
  double raise = 0.0;        // amount added to both root heights
  double height = 0.0;       // H: optimal cone star height for the raised trees
  TTree source, target;      // raised trees
  std::vector<TTree> detour;
  double detour_length = 0.0;
  double cone_length = 0.0;
};

namespace detail {

/// Merge event of one internal node, identified by one taxon from each of
/// the two blocks it joins. The events of a tree form a spanning tree on the
/// taxa, so replaying them in any order always joins distinct blocks.
struct MergeEvent {
  std::size_t p, q;
  double time;
};

inline std::vector<MergeEvent> merge_events(const TTree& x, std::size_t s, std::size_t k, std::size_t& fixed) {
  std::vector<MergeEvent> events;
  const auto& chain = x.topology();
  for (std::size_t r = 1; r <= chain.size(); ++r) {
    const Partition prev = chain.rank(r - 1);
    const Partition& cur = chain.partitions()[r - 1];
    TaxonMask created = 0;
    for (TaxonMask b : cur.blocks())
      if (!prev.has_block(b)) created = b;
    std::vector<TaxonMask> kids;
    for (TaxonMask b : prev.blocks())
      if ((b & created) == b) kids.push_back(b);
    MergeEvent e{lowest_taxon(kids[0]), lowest_taxon(kids[1]), x.t()[r - 1]};
    const bool s_left = kids[0] & bit(s), k_left = kids[0] & bit(k);
    const bool s_in = created & bit(s), k_in = created & bit(k);
    if (s_in && k_in && s_left != k_left) {
      e = {s, k, e.time};
      fixed = r - 1;
    }
    events.push_back(e);
  }
  return events;
}

inline TTree replay(const TaxaPtr& taxa, std::vector<MergeEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const MergeEvent& a, const MergeEvent& b) { return a.time < b.time; });
  std::vector<TaxonMask> blocks;
  for (std::size_t i = 0; i < taxa->size(); ++i) blocks.push_back(bit(i));
  auto find = [&](std::size_t taxon) {
    return std::find_if(blocks.begin(), blocks.end(), [&](TaxonMask b) { return b & bit(taxon); });
  };
  std::vector<TimedPartition> visible;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    while (j < events.size() && events[j].time == events[i].time) {
      auto bp = find(events[j].p);
      TaxonMask merged = *bp;
      blocks.erase(bp);
      auto bq = find(events[j].q);
      merged |= *bq;
      blocks.erase(bq);
      blocks.push_back(merged);
      ++j;
    }
    visible.push_back({Partition(blocks), events[i].time});
    i = j;
  }
  return from_timed_partitions(taxa, std::move(visible));
}

/// Moves every node except `fixed` linearly to height H, with a waypoint at
/// each time a moving node passes the fixed one.
inline std::vector<TTree> raise_to(const TaxaPtr& taxa, const std::vector<MergeEvent>& events, std::size_t fixed, double H) {
  const double tf = events[fixed].time;
  std::vector<double> lambdas{0.0};
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i == fixed || events[i].time >= tf) continue;
    lambdas.push_back((tf - events[i].time) / (H - events[i].time));
  }
  lambdas.push_back(1.0);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  std::vector<TTree> out;
  for (double l : lambdas) {
    auto ev = events;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (i == fixed) continue;
      ev[i].time = l == 1.0 ? H : (1.0 - l) * events[i].time + l * H;
      if (events[i].time < tf && l == (tf - events[i].time) / (H - events[i].time)) ev[i].time = tf;
    }
    out.push_back(replay(taxa, std::move(ev)));
  }
  return out;
}

inline TTree raise_root(const TTree& x, double H) {
  std::vector<double> t = x.t();
  t.back() = H;
  return TTree(x.topology(), std::move(t));
}

inline std::size_t mrca_rank(const PartitionChain& c, std::size_t s, std::size_t k) {
  for (std::size_t r = 1; r <= c.size(); ++r)
    if (c.rank(r).block_of(s) & bit(k)) return r;
  return c.size();
}

}  // namespace detail

/// Raises both roots by the same amount delta (doubling from the larger root
/// height) until the detour that keeps mrca(s, k) below a root at the cone's
/// optimal star height H beats every cone path between the raised trees.
inline NonConeWitness non_cone_witness(const TTree& a, const TTree& b, std::size_t max_doublings = 64) {
  require_same_taxa(a.taxa_ptr(), b.taxa_ptr());
  const std::size_t n = a.taxon_count();
  if (n <= 3) throw Error(ErrorKind::NoWitnessPossible, "with three taxa every pair of distinct topologies meets only at star trees");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t k = s + 1; k < n; ++k)
      if (detail::mrca_rank(a.topology(), s, k) < n - 1 && detail::mrca_rank(b.topology(), s, k) < n - 1) pairs.emplace_back(s, k);
  if (pairs.empty()) {
    throw Error(ErrorKind::NoWitnessPossible, "every taxon pair has its most recent common ancestor at the root of one tree");
  }
  double delta = std::max(a.height(), b.height());
  if (delta <= 0.0) delta = 1.0;
  for (std::size_t d = 0; d <= max_doublings; ++d, delta *= 2.0) {
    TTree ra = detail::raise_root(a, a.height() + delta), rb = detail::raise_root(b, b.height() + delta);
    const ConePathResult cone = cone_path(ra, rb);
    const double H = cone.star_height;
    for (auto [s, k] : pairs) {
      const std::size_t is = detail::mrca_rank(a.topology(), s, k) - 1;
      const std::size_t jk = detail::mrca_rank(b.topology(), s, k) - 1;
      if (!(H > ra.t()[is] && H > rb.t()[jk])) continue;
      double sa = 0.0, sb = 0.0;
      for (std::size_t i = 0; i < ra.t().size(); ++i)
        if (i != is) sa += (H - ra.t()[i]) * (H - ra.t()[i]);
      for (std::size_t j = 0; j < rb.t().size(); ++j)
        if (j != jk) sb += (H - rb.t()[j]) * (H - rb.t()[j]);
      const double detour = std::sqrt(sa) + std::sqrt(sb) + std::abs(rb.t()[jk] - ra.t()[is]);
      if (!(detour < cone.length)) continue;

      std::size_t fa = 0, fb = 0;
      auto ea = detail::merge_events(ra, s, k, fa);
      auto eb = detail::merge_events(rb, s, k, fb);
      std::vector<TTree> path = detail::raise_to(a.taxa_ptr(), ea, fa, H);
      std::vector<TTree> back = detail::raise_to(a.taxa_ptr(), eb, fb, H);
      path.insert(path.end(), back.rbegin(), back.rend());
      std::vector<TTree> clean;
      for (auto& w : path)
        if (clean.empty() || !same_point(clean.back(), w)) clean.push_back(std::move(w));
      double measured;
      try {
        measured = path_length(clean);
      } catch (const Error&) {
        continue;
      }
      if (!(measured < cone.length)) continue;
      return NonConeWitness{s, k, delta, H, ra, rb, std::move(clean), measured, cone.length};
    }
  }
  throw Error(ErrorKind::NonConvergence, "no witness found within the doubling budget");
}

// ---------------------------------------------------------------------------
// Dihedral angles between shared facets of one simplex.

struct FacetAngle {
  std::size_t first = 0, second = 0;  // facets {t_k = t_{k+1}}, 1-based k
  long long dot = 0;                  // of the integer inward normals
  long long norm_sq_product = 0;
  double angle = 0.0;                 // dihedral angle, pi - angle(normals)

  bool is_third_pi() const { return dot < 0 && 4 * dot * dot == norm_sq_product; }
  bool is_half_pi() const { return dot == 0; }
};

/// Inward normal e_{k+1} - e_k of the facet t_k = t_{k+1}, in simplex coordinates.
inline std::vector<int> facet_normal(std::size_t dim, std::size_t k) {
  if (k == 0 || k >= dim) throw Error(ErrorKind::OutOfRange, "facet index out of range");
  std::vector<int> v(dim, 0);
  v[k - 1] = -1;
  v[k] = 1;
  return v;
}

inline std::vector<FacetAngle> shared_facet_angles(const PartitionChain& chain) {
  const std::size_t dim = chain.size();
  std::vector<FacetAngle> out;
  for (std::size_t i = 1; i < dim; ++i) {
    for (std::size_t j = i + 1; j < dim; ++j) {
      auto a = facet_normal(dim, i), b = facet_normal(dim, j);
      FacetAngle fa{i, j, 0, 0, 0.0};
      long long na = 0, nb = 0;
      for (std::size_t c = 0; c < dim; ++c) fa.dot += a[c] * b[c], na += a[c] * a[c], nb += b[c] * b[c];
      fa.norm_sq_product = na * nb;
      fa.angle = std::acos(-1.0) - std::acos(static_cast<double>(fa.dot) / std::sqrt(static_cast<double>(fa.norm_sq_product)));
      out.push_back(fa);
    }
  }
  return out;
}

}  // namespace ultratree
