#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ultratree/trees.hpp"

namespace ultratree {

/// Parsed Newick node before any ultrametric interpretation.
struct RawTree {
  std::vector<RawTree> children;
  std::string label;
  std::optional<double> length;
  std::size_t position = 0;  // offset of the node in the input text
};

inline constexpr double kUltrametricTolerance = 1e-6;
inline constexpr int kDefaultPrecision = 12;

namespace detail {

[[noreturn]] inline void syntax_error(std::size_t pos, const std::string& what) {
  throw Error(ErrorKind::SyntaxError, "at position " + std::to_string(pos) + ": " + what);
}

inline std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

class NewickReader {
 public:
  explicit NewickReader(std::string_view text) : text_(text) {}

  RawTree read() {
    skip();
    RawTree root = subtree();
    skip();
    if (peek() == ':') {
      ++pos_;
      root.length = number();
      skip();
    }
    if (peek() != ';') syntax_error(pos_, "expected ';'");
    ++pos_;
    skip();
    if (pos_ != text_.size()) syntax_error(pos_, "trailing characters after ';'");
    return root;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else if (c == '[') {
        auto close = text_.find(']', pos_);
        if (close == std::string_view::npos) syntax_error(pos_, "unterminated comment");
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  RawTree subtree() {
    RawTree node;
    node.position = pos_;
    if (peek() == '(') {
      ++pos_;
      for (;;) {
        skip();
        RawTree child = subtree();
        skip();
        if (peek() == ':') {
          ++pos_;
          child.length = number();
          skip();
        }
        node.children.push_back(std::move(child));
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        syntax_error(pos_, "expected ',' or ')'");
      }
      skip();
      node.label = label();
    } else {
      node.label = label();
      if (node.label.empty()) syntax_error(pos_, "expected a taxon label or '('");
    }
    return node;
  }

  std::string label() {
    std::string out;
    if (peek() == '\'') {
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) syntax_error(pos_, "unterminated quoted label");
        char c = text_[pos_++];
        if (c == '\'') {
          if (peek() == '\'') {
            out += '\'';
            ++pos_;
            continue;
          }
          break;
        }
        out += c;
      }
      return out;
    }
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' || c == ' ' || c == '\t' || c == '\n' ||
          c == '\r' || c == '\'')
        break;
      out += c;
      ++pos_;
    }
    return out;
  }

  double number() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if ((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E') {
        ++pos_;
      } else {
        break;
      }
    }
    auto value = parse_number(text_.substr(start, pos_ - start));
    if (!value || !std::isfinite(*value)) syntax_error(start, "malformed branch length");
    if (*value < 0.0) syntax_error(start, "negative branch length");
    return *value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline std::string format_number(double x, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

inline std::string quote_label(const std::string& label) {
  if (label.find_first_of("()[]',:;| \t") == std::string::npos) return label;
  std::string out = "'";
  for (char c : label) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

}  // namespace detail

inline RawTree parse_newick_raw(std::string_view text) { return detail::NewickReader(text).read(); }

/// Parses an ultrametric Newick tree into t-space coordinates.
inline TTree parse_newick(std::string_view text, double tolerance = kUltrametricTolerance) {
  RawTree root = parse_newick_raw(text);
  if (root.length && *root.length != 0.0) detail::syntax_error(root.position, "root branch length must be absent or zero");

  // Leaves and depths.
  std::vector<std::string> labels;
  struct Leaf {
    std::string label;
    double depth;
  };
  std::vector<Leaf> leaves;
  std::function<void(const RawTree&, double, bool)> collect = [&](const RawTree& node, double depth, bool is_root) {
    if (!is_root) {
      if (!node.length) detail::syntax_error(node.position, "missing branch length");
      depth += *node.length;
    }
    if (node.children.empty()) {
      leaves.push_back({node.label, depth});
      labels.push_back(node.label);
    }
    for (const auto& c : node.children) collect(c, depth, false);
  };
  collect(root, 0.0, true);
  TaxaPtr taxa = make_taxa(labels);

  double height = 0.0;
  for (const auto& l : leaves) height = std::max(height, l.depth);
  double deviation = 0.0;
  for (const auto& l : leaves) deviation = std::max(deviation, height - l.depth);
  if (deviation > tolerance * height) {
    throw Error(ErrorKind::NotUltrametric, "leaf depths differ by up to " + detail::format_number(deviation, 6));
  }

  // Internal nodes as (time, clade, child clades).
  struct Node {
    double time;
    TaxonMask clade;
    std::vector<TaxonMask> children;
  };
  std::vector<Node> nodes;
  std::function<std::pair<TaxonMask, double>(const RawTree&, double, bool)> walk =
      [&](const RawTree& node, double depth, bool is_root) -> std::pair<TaxonMask, double> {
    if (!is_root) depth += *node.length;
    if (node.children.empty()) return {bit(*taxa->index_of(node.label)), 0.0};
    TaxonMask clade = 0;
    double child_time = 0.0;
    std::vector<TaxonMask> kids;
    for (const auto& c : node.children) {
      auto [m, t] = walk(c, depth, false);
      clade |= m;
      child_time = std::max(child_time, t);
      kids.push_back(m);
    }
    double time = std::max(child_time, height - depth);
    if (kids.size() >= 2) nodes.push_back({time, clade, std::move(kids)});
    return {clade, time};
  };
  walk(root, 0.0, true);

  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.time < b.time; });
  const double tie = 1e-12 * std::max(height, 1.0);
  std::vector<TimedPartition> visible;
  std::vector<TaxonMask> blocks;
  for (std::size_t i = 0; i < taxa->size(); ++i) blocks.push_back(bit(i));
  for (std::size_t i = 0; i < nodes.size();) {
    std::size_t j = i;
    double level = nodes[i].time;
    while (j < nodes.size() && nodes[j].time - nodes[i].time <= tie) {
      level = nodes[j].time;
      const TaxonMask clade = nodes[j].clade;
      std::erase_if(blocks, [&](TaxonMask b) { return (b & clade) == b; });
      blocks.push_back(clade);
      ++j;
    }
    visible.push_back({Partition(blocks), level});
    i = j;
  }
  return from_timed_partitions(taxa, std::move(visible));
}

inline std::string write_newick(const TTree& tree, int precision = kDefaultPrecision) {
  const TaxonSet& taxa = tree.topology().taxa();
  auto levels = tree.timed_partitions();
  // Creation time and children of each clade that forms a node.
  std::map<TaxonMask, std::pair<double, std::vector<TaxonMask>>> nodes;
  Partition prev = Partition::singletons(taxa.size());
  for (const auto& level : levels) {
    for (TaxonMask b : level.partition.blocks()) {
      if (prev.has_block(b)) continue;
      std::vector<TaxonMask> kids;
      for (TaxonMask p : prev.blocks())
        if ((p & b) == p) kids.push_back(p);
      nodes[b] = {level.time, std::move(kids)};
    }
    prev = level.partition;
  }
  std::function<std::string(TaxonMask, double)> emit = [&](TaxonMask clade, double parent_time) -> std::string {
    std::string out;
    double own_time = 0.0;
    if (taxon_count(clade) == 1) {
      out = detail::quote_label(taxa.label(lowest_taxon(clade)));
    } else {
      const auto& [time, kids] = nodes.at(clade);
      own_time = time;
      out = "(";
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += ',';
        out += emit(kids[i], time);
      }
      out += ")";
    }
    if (parent_time >= 0.0) out += ":" + detail::format_number(parent_time - own_time, precision);
    return out;
  };
  return emit(taxa.all(), -1.0) + ";";
}

// Ranked-partition text: "(1,2|3|4):1;(1,2|3,4):8;(1,2,3,4):9".

inline TTree parse_ranked(std::string_view text) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r')) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= text.size() || text[pos] != c) detail::syntax_error(pos, std::string("expected '") + c + "'");
    ++pos;
  };
  auto read_label = [&] {
    skip();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ',' || c == '|' || c == '(' || c == ')' || c == ':' || c == ';' || c == ' ' || c == '\t') break;
      ++pos;
    }
    if (pos == start) detail::syntax_error(pos, "expected a taxon label");
    return std::string(text.substr(start, pos - start));
  };

  struct RawPart {
    std::vector<std::vector<std::string>> blocks;
    double time;
  };
  std::vector<RawPart> raw;
  skip();
  while (pos < text.size()) {
    RawPart part;
    expect('(');
    for (;;) {
      std::vector<std::string> block{read_label()};
      skip();
      while (pos < text.size() && text[pos] == ',') {
        ++pos;
        block.push_back(read_label());
        skip();
      }
      part.blocks.push_back(std::move(block));
      if (pos < text.size() && text[pos] == '|') {
        ++pos;
        continue;
      }
      break;
    }
    expect(')');
    expect(':');
    skip();
    std::size_t start = pos;
    while (pos < text.size() && text[pos] != ';' && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\n') ++pos;
    auto value = detail::parse_number(text.substr(start, pos - start));
    if (!value || !std::isfinite(*value)) detail::syntax_error(start, "malformed time");
    part.time = *value;
    raw.push_back(std::move(part));
    skip();
    if (pos < text.size()) {
      expect(';');
      skip();
    }
  }
  if (raw.empty()) detail::syntax_error(0, "empty tree");

  std::vector<std::string> labels;
  for (const auto& b : raw.front().blocks) labels.insert(labels.end(), b.begin(), b.end());
  TaxaPtr taxa = make_taxa(labels);
  std::vector<TimedPartition> parts;
  for (const auto& rp : raw) {
    std::vector<TaxonMask> blocks;
    TaxonMask seen = 0;
    for (const auto& b : rp.blocks) {
      TaxonMask m = 0;
      for (const auto& l : b) {
        auto idx = taxa->index_of(l);
        if (!idx) throw Error(ErrorKind::TaxonSetMismatch, "taxon '" + l + "' is not in the first partition");
        if ((seen | m) & bit(*idx)) throw Error(ErrorKind::DuplicateTaxon, "taxon '" + l + "' appears twice in a partition");
        m |= bit(*idx);
      }
      seen |= m;
      blocks.push_back(m);
    }
    if (seen != taxa->all()) throw Error(ErrorKind::TaxonSetMismatch, "partition does not cover the taxon set");
    if (rp.time < 0.0) throw Error(ErrorKind::NonMonotoneTimes, "negative time");
    parts.push_back({Partition(std::move(blocks)), rp.time});
  }
  std::stable_sort(parts.begin(), parts.end(), [](const TimedPartition& a, const TimedPartition& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.partition.block_count() > b.partition.block_count();
  });
  return from_timed_partitions(taxa, std::move(parts));
}

inline std::string write_ranked(const TTree& tree, int precision = kDefaultPrecision) {
  std::string out;
  for (const auto& tp : tree.timed_partitions()) {
    if (!out.empty()) out += ';';
    std::string blocks;
    for (TaxonMask b : tp.partition.blocks()) {
      if (!blocks.empty()) blocks += '|';
      std::string block;
      for (std::size_t i = 0; i < tree.taxon_count(); ++i) {
        if (b & bit(i)) {
          if (!block.empty()) block += ',';
          block += tree.topology().taxa().label(i);
        }
      }
      blocks += block;
    }
    out += "(" + blocks + "):" + detail::format_number(tp.time, precision);
  }
  return out;
}

enum class TreeFormat { newick, ranked };

inline TTree parse_tree(std::string_view text, TreeFormat format) {
  return format == TreeFormat::newick ? parse_newick(text) : parse_ranked(text);
}

inline std::string write_tree(const TTree& tree, TreeFormat format, int precision = kDefaultPrecision) {
  return format == TreeFormat::newick ? write_newick(tree, precision) : write_ranked(tree, precision);
}

/// Non-empty, non-comment lines of a multi-tree file.
inline std::vector<std::string> read_tree_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    lines.push_back(line.substr(first, last - first + 1));
  }
  return lines;
}

inline std::vector<TTree> read_trees(std::istream& in, TreeFormat format) {
  std::vector<TTree> trees;
  for (const auto& line : read_tree_lines(in)) trees.push_back(parse_tree(line, format));
  return trees;
}

}  // namespace ultratree
