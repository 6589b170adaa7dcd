#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

namespace ultratree {

inline constexpr double kCoverTolerance = 1e-12;
inline constexpr double kRatioMergeTolerance = 1e-12;

/// One pair (A_i, B_i) of a geodesic support; indices refer to the caller's
/// source and target coordinate lists.
struct SupportPair {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  double a_norm = 0.0;
  double b_norm = 0.0;

  double ratio() const { return a_norm / b_norm; }
  /// Fraction of the path at which the A side reaches zero length.
  double breakpoint() const { return a_norm / (a_norm + b_norm); }
};

struct SupportSolution {
  std::vector<SupportPair> pairs;   // ordered by non-decreasing ratio
  std::vector<std::size_t> a_free;  // source coordinates compatible with all of the target
  std::vector<std::size_t> b_free;  // target coordinates compatible with all of the source
};

using IncompatibilityFn = std::function<bool(std::size_t, std::size_t)>;

namespace detail {

inline double squared_norm(const std::vector<std::size_t>& idx, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i : idx) s += w[i] * w[i];
  return s;
}

}  // namespace detail

struct VertexCover {
  std::vector<std::size_t> a;  // positions into the left vertex list
  std::vector<std::size_t> b;  // positions into the right vertex list
  double weight = 0.0;
};

/// Minimum-weight vertex cover of a bipartite graph via max-flow
/// (Edmonds-Karp). The returned cover is read off the cut closest to the
/// source, which makes the choice deterministic when several minima exist.
inline VertexCover min_weight_vertex_cover(const std::vector<double>& left, const std::vector<double>& right,
                                           const std::function<bool(std::size_t, std::size_t)>& edge) {
  const std::size_t na = left.size(), nb = right.size();
  const std::size_t source = na + nb, sink = source + 1, nodes = sink + 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cap(nodes, std::vector<double>(nodes, 0.0));
  std::vector<std::vector<std::size_t>> adj(nodes);
  auto link = [&](std::size_t u, std::size_t v, double c) {
    cap[u][v] = c;
    adj[u].push_back(v);
    adj[v].push_back(u);
  };
  for (std::size_t i = 0; i < na; ++i) link(source, i, left[i]);
  for (std::size_t j = 0; j < nb; ++j) link(na + j, sink, right[j]);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (edge(i, j)) link(i, na + j, inf);

  const double eps = 1e-15;
  std::vector<std::size_t> parent(nodes);
  auto bfs = [&]() {
    std::fill(parent.begin(), parent.end(), nodes);
    parent[source] = source;
    std::queue<std::size_t> q;
    q.push(source);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj[u]) {
        if (parent[v] == nodes && cap[u][v] > eps) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    return parent[sink] != nodes;
  };
  while (bfs()) {
    double push = inf;
    for (std::size_t v = sink; v != source; v = parent[v]) push = std::min(push, cap[parent[v]][v]);
    for (std::size_t v = sink; v != source; v = parent[v]) {
      cap[parent[v]][v] -= push;
      cap[v][parent[v]] += push;
    }
  }
  bfs();  // parent now marks the source side of the minimum cut
  VertexCover cover;
  for (std::size_t i = 0; i < na; ++i) {
    if (parent[i] == nodes) {
      cover.a.push_back(i);
      cover.weight += left[i];
    }
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (parent[na + j] != nodes) {
      cover.b.push_back(j);
      cover.weight += right[j];
    }
  }
  return cover;
}

/// Successive-support computation. `a` and `b` are positive coordinate
/// values; `incompatible(i, j)` says whether source coordinate i and target
/// coordinate j can never coexist in one cell.
inline SupportSolution geodesic_support(const std::vector<double>& a, const std::vector<double>& b,
                                        const IncompatibilityFn& incompatible) {
  SupportSolution sol;
  SupportPair start;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool any = false;
    for (std::size_t j = 0; j < b.size() && !any; ++j) any = incompatible(i, j);
    (any ? start.a : sol.a_free).push_back(i);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    bool any = false;
    for (std::size_t i = 0; i < a.size() && !any; ++i) any = incompatible(i, j);
    (any ? start.b : sol.b_free).push_back(j);
  }
  if (start.a.empty()) return sol;
  start.a_norm = std::sqrt(detail::squared_norm(start.a, a));
  start.b_norm = std::sqrt(detail::squared_norm(start.b, b));
  sol.pairs.push_back(std::move(start));

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t p = 0; p < sol.pairs.size(); ++p) {
      const SupportPair& pair = sol.pairs[p];
      const double a2 = pair.a_norm * pair.a_norm, b2 = pair.b_norm * pair.b_norm;
      std::vector<double> wl, wr;
      for (std::size_t i : pair.a) wl.push_back(a[i] * a[i] / a2);
      for (std::size_t j : pair.b) wr.push_back(b[j] * b[j] / b2);
      VertexCover cover =
          min_weight_vertex_cover(wl, wr, [&](std::size_t i, std::size_t j) { return incompatible(pair.a[i], pair.b[j]); });
      if (cover.weight >= 1.0 - kCoverTolerance) continue;

      SupportPair first, second;
      std::vector<bool> in_a(pair.a.size(), false), in_b(pair.b.size(), false);
      for (std::size_t i : cover.a) in_a[i] = true;
      for (std::size_t j : cover.b) in_b[j] = true;
      for (std::size_t i = 0; i < pair.a.size(); ++i) (in_a[i] ? first.a : second.a).push_back(pair.a[i]);
      for (std::size_t j = 0; j < pair.b.size(); ++j) (in_b[j] ? second.b : first.b).push_back(pair.b[j]);
      if (first.a.empty() || first.b.empty() || second.a.empty() || second.b.empty()) continue;
      first.a_norm = std::sqrt(detail::squared_norm(first.a, a));
      first.b_norm = std::sqrt(detail::squared_norm(first.b, b));
      second.a_norm = std::sqrt(detail::squared_norm(second.a, a));
      second.b_norm = std::sqrt(detail::squared_norm(second.b, b));
      sol.pairs[p] = std::move(first);
      sol.pairs.insert(sol.pairs.begin() + static_cast<std::ptrdiff_t>(p) + 1, std::move(second));
      changed = true;
      break;
    }
  }
  return sol;
}

/// Merges pairs whose ratios agree to within the tolerance and sorts by ratio.
inline void normalise_support(std::vector<SupportPair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const SupportPair& x, const SupportPair& y) { return x.ratio() < y.ratio(); });
  std::vector<SupportPair> merged;
  for (auto& p : pairs) {
    if (!merged.empty() && std::abs(merged.back().ratio() - p.ratio()) <= kRatioMergeTolerance * std::max(1.0, p.ratio())) {
      SupportPair& m = merged.back();
      m.a.insert(m.a.end(), p.a.begin(), p.a.end());
      m.b.insert(m.b.end(), p.b.begin(), p.b.end());
      m.a_norm = std::hypot(m.a_norm, p.a_norm);
      m.b_norm = std::hypot(m.b_norm, p.b_norm);
    } else {
      merged.push_back(std::move(p));
    }
  }
  pairs = std::move(merged);
}

/// Length of the geodesic given the squared common-coordinate differences.
inline double support_length(const SupportSolution& sol, const std::vector<double>& a, const std::vector<double>& b,
                             double common_sq) {
  double d2 = common_sq;
  for (const auto& p : sol.pairs) d2 += (p.a_norm + p.b_norm) * (p.a_norm + p.b_norm);
  for (std::size_t i : sol.a_free) d2 += a[i] * a[i];
  for (std::size_t j : sol.b_free) d2 += b[j] * b[j];
  return std::sqrt(d2);
}

/// Coordinate values at path fraction lambda (0 = source, 1 = target).
inline void support_point(const SupportSolution& sol, const std::vector<double>& a, const std::vector<double>& b,
                          double lambda, std::vector<double>& a_out, std::vector<double>& b_out) {
  a_out.assign(a.size(), 0.0);
  b_out.assign(b.size(), 0.0);
  for (const auto& p : sol.pairs) {
    // Snap near the breakpoint so both sides are never positive together.
    const double bp = p.breakpoint();
    const bool a_gone = lambda >= bp - kRatioMergeTolerance, b_unborn = lambda <= bp + kRatioMergeTolerance;
    const double fa = a_gone ? 0.0 : ((1.0 - lambda) * p.a_norm - lambda * p.b_norm) / p.a_norm;
    const double fb = b_unborn ? 0.0 : (lambda * p.b_norm - (1.0 - lambda) * p.a_norm) / p.b_norm;
    for (std::size_t i : p.a) a_out[i] = fa * a[i];
    for (std::size_t j : p.b) b_out[j] = fb * b[j];
  }
  for (std::size_t i : sol.a_free) a_out[i] = (1.0 - lambda) * a[i];
  for (std::size_t j : sol.b_free) b_out[j] = lambda * b[j];
}

}  // namespace ultratree
