#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ultratree/error.hpp"

namespace ultratree {

/// Bit set over taxon indices; bit i is the i-th label in canonical order.
using TaxonMask = std::uint64_t;

inline constexpr std::size_t kMaxTaxa = 64;

inline constexpr TaxonMask bit(std::size_t i) noexcept { return TaxonMask{1} << i; }
inline std::size_t lowest_taxon(TaxonMask m) noexcept { return static_cast<std::size_t>(std::countr_zero(m)); }
inline std::size_t taxon_count(TaxonMask m) noexcept { return static_cast<std::size_t>(std::popcount(m)); }

// Labels are kept in lexicographic order, fixed at construction.
class TaxonSet {
 public:
  explicit TaxonSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
      throw Error(ErrorKind::FewerThanTwoTaxa, "need at least two taxa, got " + std::to_string(labels_.size()));
    }
    if (labels_.size() > kMaxTaxa) {
      throw Error(ErrorKind::InvalidArgument, "at most 64 taxa are supported");
    }
    for (const auto& label : labels_) {
      if (label.empty()) throw Error(ErrorKind::InvalidArgument, "empty taxon label");
    }
    std::sort(labels_.begin(), labels_.end());
    auto dup = std::adjacent_find(labels_.begin(), labels_.end());
    if (dup != labels_.end()) throw Error(ErrorKind::DuplicateTaxon, "taxon '" + *dup + "' appears twice");
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  TaxonMask all() const noexcept { return labels_.size() == 64 ? ~TaxonMask{0} : bit(labels_.size()) - 1; }

  bool operator==(const TaxonSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

using TaxaPtr = std::shared_ptr<const TaxonSet>;

inline TaxaPtr make_taxa(std::vector<std::string> labels) {
  return std::make_shared<const TaxonSet>(std::move(labels));
}

/// Taxa labelled "1", "2", ..., "n".
inline TaxaPtr numbered_taxa(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return make_taxa(std::move(labels));
}

inline bool same_taxa(const TaxaPtr& a, const TaxaPtr& b) { return a == b || (a && b && *a == *b); }

inline void require_same_taxa(const TaxaPtr& a, const TaxaPtr& b) {
  if (!same_taxa(a, b)) throw Error(ErrorKind::TaxonSetMismatch, "trees are over different taxon sets");
}

}  // namespace ultratree
