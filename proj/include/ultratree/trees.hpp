#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ultratree/chain.hpp"

namespace ultratree {

/// A partition tagged with the least time at which cutting the tree yields it.
struct TimedPartition {
  Partition partition;
  double time = 0.0;

  bool operator==(const TimedPartition&) const = default;
};

namespace detail {

inline void require_finite_nonnegative(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be finite and non-negative");
  }
}

}  // namespace detail

/// A point of the cubical complex: ranked topology plus coalescent-interval
/// lengths tau_1..tau_{n-1}. tau[0] is the time of the first merge; tau[k]
/// (k >= 1) is how long partition P_k persists. Zero entries are boundary points.
class TauTree {
 public:
  TauTree() = default;

  TauTree(PartitionChain topology, std::vector<double> tau) : topology_(std::move(topology)), tau_(std::move(tau)) {
    if (tau_.size() != topology_.size()) throw Error(ErrorKind::InvalidArgument, "tau vector length must be n - 1");
    detail::require_finite_nonnegative(tau_, "tau coordinates");
  }

  const PartitionChain& topology() const noexcept { return topology_; }
  const std::vector<double>& tau() const noexcept { return tau_; }
  const TaxaPtr& taxa_ptr() const noexcept { return topology_.taxa_ptr(); }
  std::size_t taxon_count() const noexcept { return topology_.taxon_count(); }

  bool fully_resolved() const noexcept {
    for (std::size_t k = 1; k < tau_.size(); ++k)
      if (tau_[k] <= 0.0) return false;
    return true;
  }

  /// Interior partitions with positive interval length, paired with that length.
  std::vector<std::pair<Partition, double>> weighted_partitions() const {
    std::vector<std::pair<Partition, double>> out;
    for (std::size_t k = 1; k < tau_.size(); ++k)
      if (tau_[k] > 0.0) out.emplace_back(topology_.partitions()[k - 1], tau_[k]);
    return out;
  }

 private:
  PartitionChain topology_;
  std::vector<double> tau_;
};

/// A point of the simplicial complex: ranked topology plus node times
/// 0 <= t_1 <= ... <= t_{n-1}. Ties are boundary points.
class TTree {
 public:
  TTree() = default;

  TTree(PartitionChain topology, std::vector<double> t, std::optional<double> height_bound = std::nullopt)
      : topology_(std::move(topology)), t_(std::move(t)), bound_(height_bound) {
    if (t_.size() != topology_.size()) throw Error(ErrorKind::InvalidArgument, "time vector length must be n - 1");
    detail::require_finite_nonnegative(t_, "node times");
    for (std::size_t k = 1; k < t_.size(); ++k) {
      if (t_[k] < t_[k - 1]) throw Error(ErrorKind::NonMonotoneTimes, "node times must be non-decreasing");
    }
    if (bound_ && t_.back() > *bound_) throw Error(ErrorKind::OutOfRange, "tree height exceeds the configured bound");
  }

  const PartitionChain& topology() const noexcept { return topology_; }
  const std::vector<double>& t() const noexcept { return t_; }
  const TaxaPtr& taxa_ptr() const noexcept { return topology_.taxa_ptr(); }
  std::size_t taxon_count() const noexcept { return topology_.taxon_count(); }
  std::optional<double> height_bound() const noexcept { return bound_; }
  double height() const noexcept { return t_.back(); }

  /// All node times pairwise distinct.
  bool fully_resolved() const noexcept {
    for (std::size_t k = 1; k < t_.size(); ++k)
      if (t_[k] <= t_[k - 1]) return false;
    return true;
  }

  /// The partitions that exist for a positive time span, plus the root.
  std::vector<TimedPartition> timed_partitions() const {
    std::vector<TimedPartition> out;
    for (std::size_t k = 0; k < t_.size(); ++k) {
      if (k + 1 == t_.size() || t_[k] < t_[k + 1]) out.push_back({topology_.partitions()[k], t_[k]});
    }
    return out;
  }

 private:
  PartitionChain topology_;
  std::vector<double> t_;
  std::optional<double> bound_;
};

inline TTree to_t(const TauTree& tree) {
  std::vector<double> t(tree.tau().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    acc += tree.tau()[i];
    t[i] = acc;
  }
  return TTree(tree.topology(), std::move(t));
}

inline TauTree to_tau(const TTree& tree) {
  const auto& t = tree.t();
  std::vector<double> tau(t.size());
  tau[0] = t[0];
  for (std::size_t i = 1; i < t.size(); ++i) tau[i] = t[i] - t[i - 1];
  return TauTree(tree.topology(), std::move(tau));
}

/// Builds a tree from visible timed partitions (any order). The partitions
/// must be pairwise comparable with times increasing along refinement, and the
/// single-block partition must be present. Missing ranks are filled in as
/// zero-length ties.
inline TTree from_timed_partitions(const TaxaPtr& taxa, std::vector<TimedPartition> parts) {
  const std::size_t n = taxa->size();
  std::erase_if(parts, [&](const TimedPartition& tp) { return tp.partition.block_count() == n && tp.time == 0.0; });
  for (const auto& tp : parts) {
    if (tp.partition.cover() != taxa->all()) throw Error(ErrorKind::TaxonSetMismatch, "partition does not cover the taxon set");
    if (!std::isfinite(tp.time) || tp.time < 0.0) throw Error(ErrorKind::NonMonotoneTimes, "times must be finite and non-negative");
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      const auto& p = parts[i].partition;
      const auto& q = parts[j].partition;
      if (!comparable(p, q) || p == q) throw Error(ErrorKind::ChainViolation, "two partitions are not strictly ordered by refinement");
    }
  }
  std::sort(parts.begin(), parts.end(),
            [](const TimedPartition& a, const TimedPartition& b) { return a.partition.block_count() > b.partition.block_count(); });
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (!(parts[i].time > parts[i - 1].time)) {
      throw Error(ErrorKind::NonMonotoneTimes, "times must strictly increase from finer to coarser partitions");
    }
  }
  if (parts.empty() || parts.back().partition.block_count() != 1) {
    throw Error(ErrorKind::ChainViolation, "the single-block (root) partition is missing");
  }
  std::vector<Partition> visible;
  for (const auto& tp : parts) visible.push_back(tp.partition);
  std::vector<Partition> full = complete_chain(n, visible);
  std::vector<double> t(full.size());
  std::size_t v = 0;
  for (std::size_t k = 0; k < full.size(); ++k) {
    while (!refines(full[k], parts[v].partition)) ++v;
    t[k] = parts[v].time;
  }
  return TTree(PartitionChain(taxa, std::move(full)), std::move(t));
}

/// Same point of t-space (topology may differ only in invisible ranks).
inline bool same_point(const TTree& a, const TTree& b, double tol = 0.0) {
  if (!same_taxa(a.taxa_ptr(), b.taxa_ptr())) return false;
  auto pa = a.timed_partitions();
  auto pb = b.timed_partitions();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].partition != pb[i].partition || std::abs(pa[i].time - pb[i].time) > tol) return false;
  }
  return true;
}

inline bool same_point(const TauTree& a, const TauTree& b, double tol = 0.0) {
  if (!same_taxa(a.taxa_ptr(), b.taxa_ptr())) return false;
  if (std::abs(a.tau()[0] - b.tau()[0]) > tol) return false;
  auto pa = a.weighted_partitions();
  auto pb = b.weighted_partitions();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first || std::abs(pa[i].second - pb[i].second) > tol) return false;
  }
  return true;
}

/// Builds a tau-space point from tau_1 and a set of weighted interior
/// partitions, which must be pairwise comparable.
inline TauTree tau_tree_from_weighted(const TaxaPtr& taxa, double tau1, std::vector<std::pair<Partition, double>> weighted) {
  const std::size_t n = taxa->size();
  std::erase_if(weighted, [](const auto& w) { return !(w.second > 0.0); });
  std::sort(weighted.begin(), weighted.end(),
            [](const auto& a, const auto& b) { return a.first.block_count() > b.first.block_count(); });
  std::vector<Partition> visible;
  for (const auto& w : weighted) visible.push_back(w.first);
  visible.push_back(Partition::single_block(taxa->all()));
  std::vector<Partition> full = complete_chain(n, visible);
  std::vector<double> tau(n - 1, 0.0);
  tau[0] = tau1;
  std::size_t w = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (w < weighted.size() && full[k - 1] == weighted[w].first) tau[k] = weighted[w++].second;
  }
  return TauTree(PartitionChain(taxa, std::move(full)), std::move(tau));
}

inline std::string format_ranked_topology(const PartitionChain& c) {
  std::string out = "<";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += "(" + format_partition(c.partitions()[i], c.taxa()) + ")";
  }
  return out + ">";
}

}  // namespace ultratree

namespace ultratree {

inline std::vector<FacetNeighbors> facet_neighbors(const TauTree& tree) {
  if (!tree.fully_resolved()) throw Error(ErrorKind::NotFullyResolved, "facet neighbours need a fully resolved tree");
  return facet_neighbors(tree.topology());
}

}  // namespace ultratree
