#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ultratree/partition.hpp"

namespace ultratree {

/// A ranked topology: the maximal chain P_1 < ... < P_{n-1} of partitions,
/// each obtained from the previous one by merging two blocks. The
/// all-singletons partition P_0 is implicit.
class PartitionChain {
 public:
  PartitionChain() = default;

  PartitionChain(TaxaPtr taxa, std::vector<Partition> partitions) : taxa_(std::move(taxa)), parts_(std::move(partitions)) {
    if (!taxa_) throw Error(ErrorKind::InvalidArgument, "chain without taxon set");
    const std::size_t n = taxa_->size();
    if (parts_.size() != n - 1) {
      throw Error(ErrorKind::IncompleteChain, "a chain on " + std::to_string(n) + " taxa needs " + std::to_string(n - 1) +
                                                  " partitions, got " + std::to_string(parts_.size()));
    }
    Partition prev = Partition::singletons(n);
    for (std::size_t k = 0; k < parts_.size(); ++k) {
      const Partition& p = parts_[k];
      if (p.cover() != taxa_->all()) throw Error(ErrorKind::TaxonSetMismatch, "partition does not cover the taxon set");
      if (p.block_count() != n - 1 - k || !refines(prev, p)) {
        throw Error(ErrorKind::ChainViolation, "partition " + std::to_string(k + 1) + " is not a single merge of its predecessor");
      }
      prev = p;
    }
  }

  const TaxonSet& taxa() const noexcept { return *taxa_; }
  const TaxaPtr& taxa_ptr() const noexcept { return taxa_; }
  std::size_t taxon_count() const noexcept { return taxa_->size(); }

  /// Number of partitions, n - 1.
  std::size_t size() const noexcept { return parts_.size(); }

  /// P_rank for rank in 0..n-1; rank 0 is the all-singletons partition.
  Partition rank(std::size_t r) const {
    if (r == 0) return Partition::singletons(taxa_->size());
    return parts_.at(r - 1);
  }

  const std::vector<Partition>& partitions() const noexcept { return parts_; }

  /// Interior partitions P_1..P_{n-2}; these carry the non-trivial coordinates.
  std::span<const Partition> interior() const noexcept { return std::span(parts_).first(parts_.size() - 1); }

  bool contains(const Partition& p) const { return std::find(parts_.begin(), parts_.end(), p) != parts_.end(); }

  bool operator==(const PartitionChain& other) const { return parts_ == other.parts_ && same_taxa(taxa_, other.taxa_); }
  auto operator<=>(const PartitionChain& other) const { return parts_ <=> other.parts_; }

 private:
  TaxaPtr taxa_;
  std::vector<Partition> parts_;
};

struct ChainHash {
  std::size_t operator()(const PartitionChain& c) const noexcept {
    std::size_t h = 0;
    for (const auto& p : c.partitions()) h = h * 1000003u ^ PartitionHash{}(p);
    return h;
  }
};

/// Builds a chain from the sequence of merges applied to the all-singletons partition.
inline PartitionChain build_chain(const TaxaPtr& taxa, std::span<const std::pair<TaxonMask, TaxonMask>> merges) {
  Partition current = Partition::singletons(taxa->size());
  std::vector<Partition> parts;
  for (const auto& [a, b] : merges) {
    current = current.merged(a, b);
    parts.push_back(current);
  }
  if (parts.size() != taxa->size() - 1) {
    throw Error(ErrorKind::IncompleteChain, "merges end before reaching the single-block partition");
  }
  return PartitionChain(taxa, std::move(parts));
}

inline PartitionChain build_chain(const TaxaPtr& taxa, std::initializer_list<std::pair<TaxonMask, TaxonMask>> merges) {
  return build_chain(taxa, std::span<const std::pair<TaxonMask, TaxonMask>>(merges.begin(), merges.size()));
}

/// (n-1)! n! / 2^(n-1), exactly.
inline boost::multiprecision::cpp_int count_ranked_topologies(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::FewerThanTwoTaxa, "n must be at least 2");
  // Product over merge steps of C(k, 2) for k = n..2.
  boost::multiprecision::cpp_int count = 1;
  for (std::size_t k = n; k >= 2; --k) count *= k * (k - 1) / 2;
  return count;
}

inline std::uint64_t count_ranked_topologies_u64(std::size_t n) {
  auto exact = count_ranked_topologies(n);
  if (exact > std::numeric_limits<std::uint64_t>::max()) {
    throw Error(ErrorKind::Overflow, "count for n = " + std::to_string(n) + " exceeds 64 bits");
  }
  return exact.convert_to<std::uint64_t>();
}

inline constexpr std::size_t kDefaultEnumerationCap = 7;

/// All ranked topologies on the taxon set, sorted by their partition sequence.
inline std::vector<PartitionChain> enumerate_ranked_topologies(const TaxaPtr& taxa,
                                                               std::size_t cap = kDefaultEnumerationCap) {
  const std::size_t n = taxa->size();
  if (n > cap) throw Error(ErrorKind::CapExceeded, "n = " + std::to_string(n) + " exceeds enumeration cap " + std::to_string(cap));
  std::vector<std::vector<Partition>> out;
  std::vector<Partition> stack;
  std::function<void(Partition)> rec = [&](Partition current) {
    if (current.block_count() == 1) {
      out.push_back(stack);
      return;
    }
    std::vector<TaxonMask> blocks(current.blocks().begin(), current.blocks().end());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (std::size_t j = i + 1; j < blocks.size(); ++j) {
        stack.push_back(current.merged(blocks[i], blocks[j]));
        rec(stack.back());
        stack.pop_back();
      }
    }
  };
  rec(Partition::singletons(n));
  std::sort(out.begin(), out.end());
  std::vector<PartitionChain> chains;
  chains.reserve(out.size());
  for (auto& parts : out) chains.emplace_back(taxa, std::move(parts));
  return chains;
}

/// Chains that share the facet obtained by collapsing P_rank (1 <= rank <= n-2),
/// excluding the chain itself.
inline std::vector<PartitionChain> facet_alternatives(const PartitionChain& chain, std::size_t rank) {
  if (rank < 1 || rank + 1 >= chain.taxon_count()) throw Error(ErrorKind::OutOfRange, "facet rank out of range");
  const Partition below = chain.rank(rank - 1);
  const Partition above = chain.rank(rank + 1);
  const Partition& own = chain.partitions()[rank - 1];
  std::vector<PartitionChain> result;
  auto blocks = below.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t j = i + 1; j < blocks.size(); ++j) {
      if (above.block_of(lowest_taxon(blocks[i])) != above.block_of(lowest_taxon(blocks[j]))) continue;
      Partition candidate = below.merged(blocks[i], blocks[j]);
      if (candidate == own) continue;
      auto parts = chain.partitions();
      parts[rank - 1] = std::move(candidate);
      result.emplace_back(chain.taxa_ptr(), std::move(parts));
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

/// Completes a chain of pairwise comparable partitions (finest first, ending
/// with the single block) to a maximal chain. Gaps are filled by merging the
/// two lowest blocks inside the first coarser block that still needs merging.
inline std::vector<Partition> complete_chain(std::size_t n, const std::vector<Partition>& visible) {
  std::vector<Partition> out;
  Partition prev = Partition::singletons(n);
  for (const Partition& target : visible) {
    if (!refines(prev, target) || target.block_count() >= prev.block_count()) {
      throw Error(ErrorKind::ChainViolation, "partitions do not form a strictly coarsening chain");
    }
    while (prev.block_count() > target.block_count() + 1) {
      TaxonMask a = 0, b = 0;
      for (TaxonMask t : target.blocks()) {
        std::vector<TaxonMask> inside;
        for (TaxonMask p : prev.blocks())
          if ((p & t) == p) inside.push_back(p);
        if (inside.size() >= 2) {
          a = inside[0];
          b = inside[1];
          break;
        }
      }
      prev = prev.merged(a, b);
      out.push_back(prev);
    }
    out.push_back(target);
    prev = target;
  }
  if (prev.block_count() != 1) throw Error(ErrorKind::IncompleteChain, "chain does not end with the single-block partition");
  return out;
}

}  // namespace ultratree

namespace ultratree {

struct FacetNeighbors {
  std::size_t coordinate;  // tau_i = 0, equivalently t_{i-1} = t_i
  std::vector<PartitionChain> chains;
};

/// For each coordinate i = 1..n-1, the other chains whose cells share the
/// facet where that coordinate vanishes. Collapsing tau_1 is never shared.
inline std::vector<FacetNeighbors> facet_neighbors(const PartitionChain& chain) {
  std::vector<FacetNeighbors> out;
  out.push_back({1, {}});
  for (std::size_t i = 2; i < chain.taxon_count(); ++i) out.push_back({i, facet_alternatives(chain, i - 1)});
  return out;
}

}  // namespace ultratree
