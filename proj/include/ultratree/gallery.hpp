#pragma once

// Shortest paths through a prescribed sequence of cells ("gallery") and
// brute-force search over sequences. Both tau- and t-space cells are the
// same polyhedral cone C = {x : G x >= 0} in their own coordinates, and
// neighbouring cells share coordinates, so a path through cells S_0..S_k is
// a polyline a -> y_1 -> ... -> y_k -> b in C where y_j lies on the facet
// shared by S_{j-1} and S_j. Minimising its length is a second-order cone
// program; it is solved by a log-barrier Newton method followed by an
// active-set polish.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include "ultratree/chain.hpp"
#include "ultratree/error.hpp"

namespace ultratree {

struct CellGeometry {
  Eigen::MatrixXd G;  // rows are the facet functionals
  Eigen::MatrixXd M;  // G^{-1}

  std::size_t dim() const { return static_cast<std::size_t>(G.rows()); }

  /// Orthogonal reflection in the hyperplane of facet f.
  Eigen::MatrixXd reflection(std::size_t f) const {
    Eigen::VectorXd g = G.row(static_cast<Eigen::Index>(f)).transpose();
    return Eigen::MatrixXd::Identity(G.cols(), G.cols()) - 2.0 * g * g.transpose() / g.squaredNorm();
  }
};

/// tau-space: every interval length is its own facet functional.
inline CellGeometry tau_geometry(std::size_t m) {
  CellGeometry g;
  g.G = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  g.M = g.G;
  return g;
}

/// t-space: 0 <= t_1 and t_{i-1} <= t_i.
inline CellGeometry t_geometry(std::size_t m) {
  const auto k = static_cast<Eigen::Index>(m);
  CellGeometry g;
  g.G = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 1; i < k; ++i) g.G(i, i - 1) = -1.0;
  g.M = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) g.M(i, j) = 1.0;
  return g;
}

struct GalleryPath {
  std::vector<Eigen::VectorXd> points;  // a, y_1, ..., y_k, b in cell coordinates
  double length = std::numeric_limits<double>::infinity();
};

struct GalleryOptions {
  double tolerance = 1e-8;  // relative duality-gap target before polishing
  std::size_t max_newton = 100000;
};

namespace detail {

inline double polyline_length(const std::vector<Eigen::VectorXd>& pts) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += (pts[i] - pts[i - 1]).norm();
  return s;
}

/// Straight line in the unfolded picture, if it crosses the facets in order
/// at points of the cone.
inline std::optional<GalleryPath> unfolded_shortcut(const CellGeometry& geo, const Eigen::VectorXd& a,
                                                    const Eigen::VectorXd& b, const std::vector<std::size_t>& facets) {
  const std::size_t m = geo.dim();
  const double scale = 1.0 + a.norm() + b.norm();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<Eigen::MatrixXd> prefix;
  for (std::size_t f : facets) {
    prefix.push_back(phi);
    phi = phi * geo.reflection(f);
  }
  const Eigen::VectorXd end = phi * b;
  const Eigen::VectorXd dir = end - a;
  GalleryPath path;
  path.points.push_back(a);
  double last = 0.0;
  for (std::size_t j = 0; j < facets.size(); ++j) {
    Eigen::VectorXd normal = prefix[j] * geo.G.row(static_cast<Eigen::Index>(facets[j])).transpose();
    const double denom = normal.dot(dir);
    if (std::abs(denom) < 1e-14 * scale) return std::nullopt;
    double lambda = -normal.dot(a) / denom;
    if (lambda < last - 1e-12 || lambda > 1.0 + 1e-12) return std::nullopt;
    lambda = std::clamp(lambda, last, 1.0);
    last = lambda;
    Eigen::VectorXd y = prefix[j].transpose() * (a + lambda * dir);
    Eigen::VectorXd z = geo.G * y;
    if (z.minCoeff() < -1e-12 * scale) return std::nullopt;
    z = z.cwiseMax(0.0);
    z(static_cast<Eigen::Index>(facets[j])) = 0.0;
    path.points.push_back(geo.M * z);
  }
  path.points.push_back(b);
  path.length = polyline_length(path.points);
  return path;
}

/// Log-barrier Newton solver for the fixed-sequence cone program. The
/// variables are the free facet-functional values u_j >= 0 of each
/// breakpoint and an upper bound s_l on the length of each leg.
class BarrierSolver {
 public:
  using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;
  using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;

  BarrierSolver(const CellGeometry& geo, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                const std::vector<std::size_t>& facets, const GalleryOptions& opt)
      : geo_(geo), facets_(facets), opt_(opt), m_(static_cast<Eigen::Index>(geo.dim())),
        k_(static_cast<Eigen::Index>(facets.size())) {
    if (m_ + 1 > 16) throw Error(ErrorKind::UnsupportedN, "path optimiser supports at most 16 taxa");
    M_ = geo.M;
    za_ = geo.G * a;
    zb_ = geo.G * b;
    scale_ = 1.0 + a.norm() + b.norm();
    nu_ = k_ * (m_ - 1);
    legs_ = k_ + 1;
    count_ = static_cast<double>(nu_ + 2 * legs_);
    for (Eigen::Index j = 0; j < k_; ++j) {
      Small P = Small::Zero(m_, m_ - 1);
      Eigen::Index c = 0;
      for (Eigen::Index i = 0; i < m_; ++i)
        if (static_cast<std::size_t>(i) != facets_[static_cast<std::size_t>(j)]) P(i, c++) = 1.0;
      embed_.push_back(M_ * P);
    }
    // Start on the chord, pushed strictly inside.
    x_.resize(nu_ + legs_);
    for (Eigen::Index j = 0; j < k_; ++j) {
      const double lambda = static_cast<double>(j + 1) / static_cast<double>(k_ + 1);
      SmallVec z = (1.0 - lambda) * za_ + lambda * zb_;
      Eigen::Index c = 0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (static_cast<std::size_t>(i) == facets_[static_cast<std::size_t>(j)]) continue;
        x_(j * (m_ - 1) + c++) = std::max(z(i), 0.05 * scale_);
      }
    }
    for (Eigen::Index l = 0; l < legs_; ++l) x_(nu_ + l) = leg(x_, l).norm() + 0.1 * scale_;
    T_ = count_ / x_.tail(legs_).sum();
  }

  /// Follows the central path until the duality gap is below tol * scale.
  void run(double tol) {
    for (;;) {
      center();
      if (gap() < tol * scale_) return;
      T_ *= 20.0;
    }
  }

  double gap() const { return count_ / T_; }
  double length() const {
    double s = 0.0;
    for (Eigen::Index l = 0; l < legs_; ++l) s += leg(x_, l).norm();
    return s;
  }
  /// Valid lower bound on the optimum once centred (with slack for inexact centring).
  double lower_bound() const { return length() - 2.0 * gap(); }

  GalleryPath path() const {
    GalleryPath p;
    for (Eigen::Index j = -1; j <= k_; ++j) p.points.push_back(M_ * z_of(x_, j));
    p.length = polyline_length(p.points);
    return p;
  }

 private:
  void center() {
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    for (int it = 0; it < 200; ++it) {
      derivatives(x_, g, H);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd dx = ldlt.solve(-g);
      if (!dx.allFinite()) return;
      const double decrement = -g.dot(dx);
      if (decrement / 2.0 < 1e-10) return;
      double step = 1.0;
      const double f0 = objective(x_);
      while (step > 1e-14) {
        Eigen::VectorXd xn = x_ + step * dx;
        const double fn = objective(xn);
        if (std::isfinite(fn) && fn <= f0 - 0.25 * step * decrement) {
          x_ = std::move(xn);
          break;
        }
        step *= 0.5;
      }
      if (step <= 1e-14) return;
      if (++newton_ > opt_.max_newton) throw Error(ErrorKind::NonConvergence, "path optimiser exceeded its Newton budget");
    }
  }

  SmallVec z_of(const Eigen::VectorXd& x, Eigen::Index j) const {
    // Breakpoint j in facet-functional coordinates, j in [-1, k].
    if (j < 0) return za_;
    if (j >= k_) return zb_;
    SmallVec z(m_);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < m_; ++i)
      z(i) = static_cast<std::size_t>(i) == facets_[static_cast<std::size_t>(j)] ? 0.0 : x(j * (m_ - 1) + c++);
    return z;
  }

  SmallVec leg(const Eigen::VectorXd& x, Eigen::Index l) const { return M_ * (z_of(x, l) - z_of(x, l - 1)); }

  double objective(const Eigen::VectorXd& x) const {
    double f = 0.0;
    for (Eigen::Index i = 0; i < nu_; ++i) {
      if (!(x(i) > 0.0)) return std::numeric_limits<double>::infinity();
      f -= std::log(x(i));
    }
    for (Eigen::Index l = 0; l < legs_; ++l) {
      const double s = x(nu_ + l);
      const double e = leg(x, l).norm();
      const double q = (s - e) * (s + e);
      if (!(s > e) || !(q > 0.0)) return std::numeric_limits<double>::infinity();
      f += T_ * s - std::log(q);
    }
    return f;
  }

  void derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const Eigen::Index nv = nu_ + legs_, w = m_ - 1;
    g.setZero(nv);
    H.setZero(nv, nv);
    for (Eigen::Index i = 0; i < nu_; ++i) {
      g(i) = -1.0 / x(i);
      H(i, i) = 1.0 / (x(i) * x(i));
    }
    for (Eigen::Index l = 0; l < legs_; ++l) {
      const Eigen::Index si = nu_ + l;
      const double s = x(si);
      const SmallVec e = leg(x, l);
      const double en = e.norm();
      const double q = (s - en) * (s + en);
      // -log(s^2 - |e|^2) in the variables (s, e).
      const double gs = T_ - 2.0 * s / q;
      const SmallVec ge = 2.0 * e / q;
      const double hss = -2.0 / q + 4.0 * s * s / (q * q);
      const SmallVec hse = -4.0 * s * e / (q * q);
      Small hee = 4.0 * e * e.transpose() / (q * q);
      hee.diagonal().array() += 2.0 / q;
      g(si) += gs;
      H(si, si) += hss;
      struct Part {
        Eigen::Index offset;
        const Small* E;
        double sign;
      };
      Part parts[2];
      int np = 0;
      if (l - 1 >= 0) parts[np++] = {(l - 1) * w, &embed_[static_cast<std::size_t>(l - 1)], -1.0};
      if (l < k_) parts[np++] = {l * w, &embed_[static_cast<std::size_t>(l)], 1.0};
      for (int p = 0; p < np; ++p) {
        const Small& Ep = *parts[p].E;
        g.segment(parts[p].offset, w) += parts[p].sign * (Ep.transpose() * ge);
        SmallVec cross = parts[p].sign * (Ep.transpose() * hse);
        H.block(parts[p].offset, si, w, 1) += cross;
        H.block(si, parts[p].offset, 1, w) += cross.transpose();
        for (int r = 0; r < np; ++r) {
          const Small& Er = *parts[r].E;
          H.block(parts[p].offset, parts[r].offset, w, w) += parts[p].sign * parts[r].sign * (Ep.transpose() * hee * Er);
        }
      }
    }
  }

  const CellGeometry& geo_;
  const std::vector<std::size_t>& facets_;
  GalleryOptions opt_;
  Eigen::Index m_, k_;
  Small M_;
  SmallVec za_, zb_;
  double scale_ = 1.0, count_ = 0.0, T_ = 1.0;
  Eigen::Index nu_ = 0, legs_ = 0;
  std::vector<Small> embed_;
  Eigen::VectorXd x_;
  std::size_t newton_ = 0;
};

/// Fixes near-zero coordinates and merges near-coincident breakpoints, then
/// minimises the remaining smooth problem by Newton's method.
inline GalleryPath polish(const CellGeometry& geo, const GalleryPath& rough, const std::vector<std::size_t>& facets) {
  const std::size_t m = geo.dim();
  const std::size_t k = facets.size();
  const double scale = 1.0 + rough.points.front().norm() + rough.points.back().norm();
  const double delta = 1e-7 * scale;

  // Group consecutive breakpoints that coincide; each group is one point.
  struct Group {
    std::vector<bool> zero;
    Eigen::VectorXd z;
  };
  std::vector<Group> groups;
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::VectorXd z = geo.G * rough.points[j + 1];
    if (!groups.empty() && (rough.points[j + 1] - rough.points[j]).norm() < delta) {
      groups.back().zero[facets[j]] = true;
      continue;
    }
    Group g{std::vector<bool>(m, false), z};
    g.zero[facets[j]] = true;
    groups.push_back(std::move(g));
  }
  // A group glued to an endpoint means the path does not need that crossing
  // to have positive length; keep it as a separate point anyway.
  std::vector<std::pair<std::size_t, std::size_t>> vars;  // (group, coordinate)
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < m; ++i) {
      if (groups[g].z(static_cast<Eigen::Index>(i)) < delta) groups[g].zero[i] = true;
      if (!groups[g].zero[i]) vars.emplace_back(g, i);
    }
  }
  const Eigen::VectorXd za = geo.G * rough.points.front(), zb = geo.G * rough.points.back();
  auto point_z = [&](const Eigen::VectorXd& v, std::ptrdiff_t g) -> Eigen::VectorXd {
    if (g < 0) return za;
    if (g >= static_cast<std::ptrdiff_t>(groups.size())) return zb;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t idx = 0; idx < vars.size(); ++idx)
      if (vars[idx].first == static_cast<std::size_t>(g)) z(static_cast<Eigen::Index>(vars[idx].second)) = v(static_cast<Eigen::Index>(idx));
    return z;
  };
  auto length = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (std::ptrdiff_t g = 0; g <= static_cast<std::ptrdiff_t>(groups.size()); ++g)
      s += (geo.M * (point_z(v, g) - point_z(v, g - 1))).norm();
    return s;
  };

  Eigen::VectorXd v(static_cast<Eigen::Index>(vars.size()));
  for (std::size_t idx = 0; idx < vars.size(); ++idx)
    v(static_cast<Eigen::Index>(idx)) = groups[vars[idx].first].z(static_cast<Eigen::Index>(vars[idx].second));

  const auto nv = static_cast<Eigen::Index>(vars.size());
  for (int it = 0; it < 50 && nv > 0; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(nv);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv);
    bool degenerate = false;
    for (std::ptrdiff_t g = 0; g <= static_cast<std::ptrdiff_t>(groups.size()); ++g) {
      Eigen::VectorXd e = geo.M * (point_z(v, g) - point_z(v, g - 1));
      const double len = e.norm();
      if (len < 1e-300) {
        degenerate = true;
        break;
      }
      Eigen::VectorXd u = e / len;
      Eigen::MatrixXd He = (Eigen::MatrixXd::Identity(e.size(), e.size()) - u * u.transpose()) / len;
      // d e / d v: +M on the later group's coordinates, -M on the earlier's.
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(e.size(), nv);
      for (Eigen::Index idx = 0; idx < nv; ++idx) {
        const auto [grp, coord] = vars[static_cast<std::size_t>(idx)];
        if (static_cast<std::ptrdiff_t>(grp) == g) J.col(idx) += geo.M.col(static_cast<Eigen::Index>(coord));
        if (static_cast<std::ptrdiff_t>(grp) == g - 1) J.col(idx) -= geo.M.col(static_cast<Eigen::Index>(coord));
      }
      grad += J.transpose() * u;
      H += J.transpose() * He * J;
    }
    if (degenerate) break;
    H.diagonal().array() += 1e-15 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd dv = H.ldlt().solve(-grad);
    if (!dv.allFinite()) break;
    const double f0 = length(v);
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      Eigen::VectorXd vn = v + step * dv;
      if (length(vn) <= f0) {
        moved = (vn - v).norm() > 0.0;
        v = vn;
        break;
      }
      step *= 0.5;
    }
    if (!moved || (step * dv).norm() < 1e-15 * scale) break;
  }
  if (nv > 0 && v.minCoeff() < -1e-13 * scale) return rough;
  v = v.cwiseMax(0.0);

  GalleryPath out;
  out.points.push_back(rough.points.front());
  // Expand groups back to one point per crossing.
  std::size_t g = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0 && (rough.points[j + 1] - rough.points[j]).norm() < delta) {
      out.points.push_back(out.points.back());
      continue;
    }
    out.points.push_back(geo.M * point_z(v, static_cast<std::ptrdiff_t>(g++)));
  }
  out.points.push_back(rough.points.back());
  out.length = polyline_length(out.points);
  return out.length <= rough.length + 1e-13 * scale ? out : rough;
}

}  // namespace detail

/// Shortest path from a to b crossing the given facets in order.
inline GalleryPath optimize_gallery(const CellGeometry& geo, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                    const std::vector<std::size_t>& facets, const GalleryOptions& opt = {}) {
  if (facets.empty()) {
    GalleryPath p;
    p.points = {a, b};
    p.length = (b - a).norm();
    return p;
  }
  if (auto shortcut = detail::unfolded_shortcut(geo, a, b, facets)) return *shortcut;
  detail::BarrierSolver solver(geo, a, b, facets, opt);
  solver.run(opt.tolerance);
  return detail::polish(geo, solver.path(), facets);
}

/// Lower bound on any path through the sequence: the unfolded chord.
inline double unfolded_lower_bound(const CellGeometry& geo, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                   const std::vector<std::size_t>& facets) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(a.size(), a.size());
  for (std::size_t f : facets) phi = phi * geo.reflection(f);
  return (a - phi * b).norm();
}

/// A candidate cell sequence: chains S_0..S_k and the facet index crossed
/// between S_{j-1} and S_j.
struct CellSequence {
  std::vector<PartitionChain> cells;
  std::vector<std::size_t> facets;
  double lower_bound = 0.0;
};

struct SearchResult {
  CellSequence sequence;
  GalleryPath path;
  std::size_t sequences_considered = 0;
  std::size_t sequences_solved = 0;
};

inline constexpr std::size_t kDefaultSearchBudget = 20'000'000;

/// Enumerates simple cell sequences of at most max_hops facet crossings from
/// `from` to `to` and returns the shortest optimised path that beats `upper`.
inline std::optional<SearchResult> search_galleries(const CellGeometry& geo, const PartitionChain& from,
                                                    const Eigen::VectorXd& a, const PartitionChain& to,
                                                    const Eigen::VectorXd& b, std::size_t max_hops, double upper,
                                                    std::size_t budget = kDefaultSearchBudget,
                                                    const GalleryOptions& opt = {}) {
  const std::size_t n = from.taxon_count();
  std::vector<CellSequence> candidates;
  std::size_t visited_nodes = 0;
  CellSequence current;
  current.cells.push_back(from);
  std::vector<Eigen::MatrixXd> phis{Eigen::MatrixXd::Identity(a.size(), a.size())};

  std::function<void()> dfs = [&]() {
    if (++visited_nodes > budget) throw Error(ErrorKind::BudgetExceeded, "cell-sequence enumeration exceeded its budget");
    const PartitionChain here = current.cells.back();
    if (here == to) {
      CellSequence c = current;
      c.lower_bound = (a - phis.back() * b).norm();
      if (c.lower_bound < upper) candidates.push_back(std::move(c));
      return;
    }
    if (current.facets.size() >= max_hops) return;
    for (std::size_t f = 1; f + 1 < n; ++f) {
      for (auto& next : facet_alternatives(here, f)) {
        if (std::find(current.cells.begin(), current.cells.end(), next) != current.cells.end()) continue;
        current.cells.push_back(std::move(next));
        current.facets.push_back(f);
        phis.push_back(phis.back() * geo.reflection(f));
        dfs();
        phis.pop_back();
        current.facets.pop_back();
        current.cells.pop_back();
      }
    }
  };
  dfs();

  std::sort(candidates.begin(), candidates.end(),
            [](const CellSequence& x, const CellSequence& y) { return x.lower_bound < y.lower_bound; });
  const double scale = 1.0 + a.norm() + b.norm();
  std::optional<SearchResult> best;
  double best_len = upper;
  std::size_t solved = 0;
  for (auto& c : candidates) {
    if (c.lower_bound >= best_len - 1e-12 * scale) break;
    ++solved;
    GalleryPath p;
    if (auto shortcut = detail::unfolded_shortcut(geo, a, b, c.facets)) {
      p = std::move(*shortcut);
    } else {
      // A coarse solve first: most sequences are ruled out by its bound.
      detail::BarrierSolver solver(geo, a, b, c.facets, opt);
      solver.run(1e-5);
      if (solver.lower_bound() >= best_len) continue;
      solver.run(opt.tolerance);
      p = detail::polish(geo, solver.path(), c.facets);
    }
    if (p.length < best_len) {
      best_len = p.length;
      best = SearchResult{c, std::move(p), candidates.size(), 0};
    }
  }
  if (best) best->sequences_solved = solved;
  return best;
}

}  // namespace ultratree
