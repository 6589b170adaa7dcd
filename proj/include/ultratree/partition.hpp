#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ultratree/taxa.hpp"

namespace ultratree {

/// A partition of the taxon set into disjoint non-empty blocks, stored with
/// blocks sorted by their least member.
class Partition {
 public:
  Partition() = default;

  explicit Partition(std::vector<TaxonMask> blocks) : blocks_(std::move(blocks)) {
    TaxonMask seen = 0;
    for (TaxonMask b : blocks_) {
      if (b == 0) throw Error(ErrorKind::InvalidArgument, "empty block in partition");
      if (seen & b) throw Error(ErrorKind::InvalidArgument, "overlapping blocks in partition");
      seen |= b;
    }
    std::sort(blocks_.begin(), blocks_.end(),
              [](TaxonMask x, TaxonMask y) { return lowest_taxon(x) < lowest_taxon(y); });
  }

  static Partition singletons(std::size_t n) {
    std::vector<TaxonMask> blocks;
    for (std::size_t i = 0; i < n; ++i) blocks.push_back(bit(i));
    return Partition(std::move(blocks));
  }

  static Partition single_block(TaxonMask all) { return Partition({all}); }

  std::span<const TaxonMask> blocks() const noexcept { return blocks_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }

  TaxonMask cover() const noexcept {
    TaxonMask m = 0;
    for (TaxonMask b : blocks_) m |= b;
    return m;
  }

  bool has_block(TaxonMask b) const noexcept { return std::find(blocks_.begin(), blocks_.end(), b) != blocks_.end(); }

  TaxonMask block_of(std::size_t taxon) const noexcept {
    for (TaxonMask b : blocks_)
      if (b & bit(taxon)) return b;
    return 0;
  }

  /// The partition obtained by merging two of its blocks.
  Partition merged(TaxonMask a, TaxonMask b) const {
    if (a == b || !has_block(a) || !has_block(b)) {
      throw Error(ErrorKind::MergeOfUnknownBlock, "merge does not name two distinct blocks of the current partition");
    }
    std::vector<TaxonMask> next;
    next.reserve(blocks_.size() - 1);
    for (TaxonMask x : blocks_)
      if (x != a && x != b) next.push_back(x);
    next.push_back(a | b);
    return Partition(std::move(next));
  }

  bool operator==(const Partition&) const = default;
  auto operator<=>(const Partition& other) const { return blocks_ <=> other.blocks_; }

 private:
  std::vector<TaxonMask> blocks_;
};

/// True iff every block of p lies inside a block of q. No taxon check.
inline bool refines(const Partition& p, const Partition& q) noexcept {
  auto qb = q.blocks();
  for (TaxonMask b : p.blocks()) {
    bool inside = false;
    for (TaxonMask c : qb) {
      if ((b & c) == b) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
  }
  return true;
}

inline bool is_refinement(const Partition& p, const Partition& q) {
  if (p.cover() != q.cover()) throw Error(ErrorKind::TaxonSetMismatch, "partitions cover different taxa");
  return refines(p, q);
}

inline bool comparable(const Partition& p, const Partition& q) noexcept { return refines(p, q) || refines(q, p); }

inline std::string format_block(TaxonMask block, const TaxonSet& taxa) {
  std::string out;
  for (std::size_t i = 0; i < taxa.size(); ++i) {
    if (block & bit(i)) {
      if (!out.empty()) out += ',';
      out += taxa.label(i);
    }
  }
  return out;
}

/// "1,2|3|4" style text.
inline std::string format_partition(const Partition& p, const TaxonSet& taxa) {
  std::string out;
  for (TaxonMask b : p.blocks()) {
    if (!out.empty()) out += '|';
    out += format_block(b, taxa);
  }
  return out;
}

struct PartitionHash {
  std::size_t operator()(const Partition& p) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (TaxonMask b : p.blocks()) h ^= std::hash<TaxonMask>{}(b) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace ultratree
