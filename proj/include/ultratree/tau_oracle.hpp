#pragma once

#include <cmath>

#include "ultratree/gallery.hpp"
#include "ultratree/trees.hpp"

namespace ultratree {

/// Independent check of tau-space distances: the shortest path over all cell
/// sequences with at most max_hops facet crossings, each optimised
/// numerically. Only practical for small n.
inline double tau_brute_force_distance(const TauTree& x, const TauTree& y, std::size_t max_hops = 6) {
  require_same_taxa(x.taxa_ptr(), y.taxa_ptr());
  const std::size_t m = x.tau().size();
  CellGeometry geo = tau_geometry(m);
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.tau().data(), static_cast<Eigen::Index>(m));
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.tau().data(), static_cast<Eigen::Index>(m));
  // Path through the face where all interior lengths vanish.
  double interior_a = a.tail(static_cast<Eigen::Index>(m - 1)).norm();
  double interior_b = b.tail(static_cast<Eigen::Index>(m - 1)).norm();
  double upper = std::hypot(a(0) - b(0), interior_a + interior_b);
  auto found = search_galleries(geo, x.topology(), a, y.topology(), b, max_hops, upper * (1.0 + 1e-12) + 1e-300);
  return found ? std::min(found->path.length, upper) : upper;
}

}  // namespace ultratree
