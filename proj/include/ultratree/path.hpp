#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ultratree/trees.hpp"

namespace ultratree {

enum class Space { tau, t, bhv };

constexpr const char* to_string(Space s) noexcept {
  switch (s) {
    case Space::tau: return "tau";
    case Space::t: return "t";
    case Space::bhv: return "bhv";
  }
  return "?";
}

struct CommonCoordinate {
  Partition partition;
  double source = 0.0;
  double target = 0.0;
};

using SupportSets = std::vector<std::pair<std::vector<Partition>, std::vector<Partition>>>;

/// A piecewise-linear path given by its waypoints; consecutive waypoints
/// share a closed cell.
template <class Tree>
struct GeodesicPath {
  Space space = Space::tau;
  std::vector<Tree> waypoints;
  std::vector<double> leg_lengths;
  std::optional<SupportSets> support;
  std::vector<CommonCoordinate> common;

  double length() const {
    double s = 0.0;
    for (double l : leg_lengths) s += l;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Cell membership and interpolation.

/// Positive-weight interior partitions of both trees form one chain.
inline bool tau_cell_mates(const TauTree& x, const TauTree& y) {
  auto px = x.weighted_partitions();
  auto py = y.weighted_partitions();
  for (const auto& [p, w] : px)
    for (const auto& [q, v] : py)
      if (!comparable(p, q) || (p.block_count() == q.block_count() && p != q)) return false;
  return true;
}

/// Visible partitions of both trees form one chain.
inline bool t_cell_mates(const TTree& x, const TTree& y) {
  if (!same_taxa(x.taxa_ptr(), y.taxa_ptr())) return false;
  auto px = x.timed_partitions();
  auto py = y.timed_partitions();
  for (const auto& p : px)
    for (const auto& q : py)
      if (!comparable(p.partition, q.partition)) return false;
  return true;
}

/// Time at which tree x reaches a partition comparable with its visible ones.
inline double time_in_tree(const TTree& x, const Partition& p) {
  for (const auto& tp : x.timed_partitions())
    if (refines(p, tp.partition)) return tp.time;
  return x.height();
}

/// A maximal chain containing the visible partitions of both cell mates.
inline PartitionChain common_chain(const TTree& x, const TTree& y) {
  std::vector<Partition> visible;
  for (const auto& tp : x.timed_partitions()) visible.push_back(tp.partition);
  for (const auto& tp : y.timed_partitions()) visible.push_back(tp.partition);
  std::sort(visible.begin(), visible.end(),
            [](const Partition& a, const Partition& b) { return a.block_count() > b.block_count(); });
  visible.erase(std::unique(visible.begin(), visible.end()), visible.end());
  for (std::size_t i = 1; i < visible.size(); ++i) {
    if (visible[i].block_count() == visible[i - 1].block_count()) {
      throw Error(ErrorKind::NotCellMates, "trees share no closed simplex");
    }
  }
  return PartitionChain(x.taxa_ptr(), complete_chain(x.taxon_count(), visible));
}

inline std::vector<double> t_coordinates_on(const TTree& x, const PartitionChain& chain) {
  std::vector<double> t;
  t.reserve(chain.size());
  for (const auto& p : chain.partitions()) t.push_back(time_in_tree(x, p));
  return t;
}

inline double t_leg_length(const TTree& x, const TTree& y) {
  if (!t_cell_mates(x, y)) throw Error(ErrorKind::NotCellMates, "trees share no closed simplex");
  PartitionChain chain = common_chain(x, y);
  auto tx = t_coordinates_on(x, chain);
  auto ty = t_coordinates_on(y, chain);
  double s = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) s += (tx[i] - ty[i]) * (tx[i] - ty[i]);
  return std::sqrt(s);
}

inline double tau_leg_length(const TauTree& x, const TauTree& y) {
  if (!tau_cell_mates(x, y)) throw Error(ErrorKind::NotCellMates, "trees share no closed cube");
  double s = (x.tau()[0] - y.tau()[0]) * (x.tau()[0] - y.tau()[0]);
  auto px = x.weighted_partitions();
  auto py = y.weighted_partitions();
  for (const auto& [p, w] : px) {
    auto it = std::find_if(py.begin(), py.end(), [&](const auto& q) { return q.first == p; });
    double v = it == py.end() ? 0.0 : it->second;
    s += (w - v) * (w - v);
  }
  for (const auto& [q, v] : py) {
    if (std::none_of(px.begin(), px.end(), [&](const auto& p) { return p.first == q; })) s += v * v;
  }
  return std::sqrt(s);
}

inline TauTree interpolate_in_cell(const TauTree& x, const TauTree& y, double f) {
  auto px = x.weighted_partitions();
  auto py = y.weighted_partitions();
  std::vector<std::pair<Partition, double>> out;
  // Drops rounding residue of a coordinate that is (nearly) vanishing here.
  auto mix = [f](double w, double v) {
    const double m = (1.0 - f) * w + f * v;
    return m <= 1e-12 * std::max(w, v) ? 0.0 : m;
  };
  for (const auto& [p, w] : px) {
    auto it = std::find_if(py.begin(), py.end(), [&](const auto& q) { return q.first == p; });
    out.emplace_back(p, mix(w, it == py.end() ? 0.0 : it->second));
  }
  for (const auto& [q, v] : py) {
    if (std::none_of(px.begin(), px.end(), [&](const auto& p) { return p.first == q; })) out.emplace_back(q, mix(0.0, v));
  }
  return tau_tree_from_weighted(x.taxa_ptr(), (1.0 - f) * x.tau()[0] + f * y.tau()[0], std::move(out));
}

inline TTree interpolate_in_cell(const TTree& x, const TTree& y, double f) {
  PartitionChain chain = common_chain(x, y);
  auto tx = t_coordinates_on(x, chain);
  auto ty = t_coordinates_on(y, chain);
  std::vector<double> t(tx.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - f) * tx[i] + f * ty[i];
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = std::max(t[i], t[i - 1]);
  return TTree(std::move(chain), std::move(t));
}

/// The point at arc-length fraction s of a path.
template <class Tree>
Tree point_at(const GeodesicPath<Tree>& path, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::OutOfRange, "path fraction must lie in [0, 1]");
  if (path.waypoints.empty()) throw Error(ErrorKind::InvalidArgument, "empty path");
  if (s == 0.0) return path.waypoints.front();
  if (s == 1.0) return path.waypoints.back();
  const double target = s * path.length();
  double acc = 0.0;
  for (std::size_t k = 0; k < path.leg_lengths.size(); ++k) {
    const double leg = path.leg_lengths[k];
    if (target <= acc + leg || k + 1 == path.leg_lengths.size()) {
      double f = leg > 0.0 ? std::clamp((target - acc) / leg, 0.0, 1.0) : 0.0;
      if (f == 0.0) return path.waypoints[k];
      if (f == 1.0) return path.waypoints[k + 1];
      return interpolate_in_cell(path.waypoints[k], path.waypoints[k + 1], f);
    }
    acc += leg;
  }
  return path.waypoints.back();
}

}  // namespace ultratree
