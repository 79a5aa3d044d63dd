#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "geoseg/constraints.hpp"
#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/metrics.hpp"
#include "geoseg/stencil.hpp"

namespace geoseg {

enum class NodeState : std::uint8_t { Far, Trial, Accepted };

inline constexpr std::uint32_t kNoNode = std::numeric_limits<std::uint32_t>::max();

// The point a node's value was taken from: (1-s) node a + s node b.
struct ParentLink {
  std::uint32_t a = kNoNode;
  std::uint32_t b = kNoNode;
  double s = 0.0;
};

struct SolverOptions {
  int stencil_radius = 2;
};

// Node index: y*W + x on the plane, (k*H + y)*W + x on the lifted grid.
struct DistanceMap {
  GridGeometry geom;
  int n_theta = 0;
  std::vector<double> U;
  std::vector<NodeState> state;
  std::vector<std::uint32_t> rank;  // acceptance order, kNoNode if never accepted
  std::vector<ParentLink> parent;
  std::vector<std::uint32_t> sources;
  std::optional<std::uint32_t> stop_node;
  std::shared_ptr<const StencilField> stencils;  // planar maps only
  std::uint32_t accepted = 0;

  bool lifted() const { return n_theta > 0; }
  std::size_t plane() const { return geom.size(); }
  std::uint32_t index(Point p, int k = 0) const {
    return static_cast<std::uint32_t>(static_cast<std::size_t>(k) * plane() + geom.index(p));
  }
  Point point(std::uint32_t i) const { return geom.point(i % plane()); }
  int level(std::uint32_t i) const { return static_cast<int>(i / plane()); }
  double theta(std::uint32_t i) const { return OrientedGridGeometry(geom, n_theta).theta(level(i)); }

  double operator()(Point p, int k = 0) const { return U[index(p, k)]; }
  bool is_source(std::uint32_t i) const { return std::find(sources.begin(), sources.end(), i) != sources.end(); }

  // Planar field; on the lifted grid the minimum over orientations.
  ScalarField spatial() const {
    ScalarField f(geom, kInfinity);
    const int levels = lifted() ? n_theta : 1;
    for (int k = 0; k < levels; ++k)
      for (std::size_t i = 0; i < plane(); ++i) f.at_index(i) = std::min(f.at_index(i), U[k * plane() + i]);
    return f;
  }

  // Accepted values in acceptance order.
  std::vector<double> acceptance_sequence() const {
    std::vector<double> seq(accepted, 0.0);
    for (std::size_t i = 0; i < U.size(); ++i)
      if (rank[i] != kNoNode) seq[rank[i]] = U[i];
    return seq;
  }
};

struct LiftedSource {
  Point p;
  int k = 0;
};

namespace detail {

// Minimum of a convex function on [0,1]; returns (argmin, value).
template <typename F>
std::pair<double, double> minimize_unit_interval(F&& f) {
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  std::pair<double, double> best = f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
  const double e0 = f(0.0), e1 = f(1.0);
  if (e0 <= best.second) best = {0.0, e0};
  if (e1 < best.second) best = {1.0, e1};
  return best;
}

using HeapEntry = std::pair<double, std::uint32_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

inline DistanceMap make_map(const GridGeometry& g, int n_theta) {
  DistanceMap d;
  d.geom = g;
  d.n_theta = n_theta;
  const std::size_t n = g.size() * static_cast<std::size_t>(std::max(1, n_theta));
  if (n >= kNoNode) throw ParameterError("grid too large");
  d.U.assign(n, kInfinity);
  d.state.assign(n, NodeState::Far);
  d.rank.assign(n, kNoNode);
  d.parent.assign(n, {});
  return d;
}

inline std::vector<std::uint8_t> stop_flags(const GridGeometry& g, const std::vector<Point>& stop) {
  std::vector<std::uint8_t> f(g.size(), 0);
  for (Point p : stop)
    if (g.contains(p)) f[g.index(p)] = 1;
  return f;
}

}  // namespace detail

// Adaptive stencils for a planar metric: N_x(u) = F(x, -u) is the cost of
// reaching x from x + u.
inline std::shared_ptr<const StencilField> planar_stencils(const MetricField& metric, const SolverOptions& opts) {
  const GridGeometry& g = metric.geometry();
  return std::make_shared<const StencilField>(
      g, opts.stencil_radius, [&](std::size_t n, Vec2 u) { return metric.eval(g.point(n), -u); },
      metric.kind() == MetricKind::Isotropic);
}

namespace detail {

// For every node y, the pairs (x, j) with x + stencil(x)[j] = y.
struct ReverseStencil {
  std::vector<std::uint32_t> begin;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
};

inline ReverseStencil reverse_stencil(const GridGeometry& g, const StencilField& sf) {
  ReverseStencil r;
  r.begin.assign(g.size() + 1, 0);
  auto each = [&](auto&& f) {
    for (std::size_t n = 0; n < g.size(); ++n) {
      const Point x = g.point(n);
      const auto offs = sf.offsets(n);
      for (std::size_t j = 0; j < offs.size(); ++j) {
        const Point y{x.x + offs[j].x, x.y + offs[j].y};
        if (g.contains(y)) f(g.index(y), static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(j));
      }
    }
  };
  each([&](std::size_t yi, std::uint32_t, std::uint32_t) { ++r.begin[yi + 1]; });
  for (std::size_t i = 0; i < g.size(); ++i) r.begin[i + 1] += r.begin[i];
  r.entries.resize(r.begin.back());
  std::vector<std::uint32_t> fill(r.begin.begin(), r.begin.end() - 1);
  each([&](std::size_t yi, std::uint32_t n, std::uint32_t j) { r.entries[fill[yi]++] = {n, j}; });
  return r;
}

}  // namespace detail

// Label-setting semi-Lagrangian solver on the plane. When y is accepted,
// every non-accepted x with y = x + e_j (e_j in the stencil of x) is updated
// from the edge j and from the simplices (j-1, j), (j, j+1) whose other vertex
// is already accepted.
inline DistanceMap solve(const MetricField& metric, const std::vector<Point>& sources, const ConstraintSet& constraints,
                         const SolverOptions& opts = {}) {
  if (metric.lifted()) throw ParameterError("use solve_lifted for curvature metrics");
  if (sources.empty()) throw ParameterError("no source points");
  const GridGeometry& g = metric.geometry();
  const ConstraintChecker cc(g, constraints);
  DistanceMap d = detail::make_map(g, 0);
  d.stencils = planar_stencils(metric, opts);
  const StencilField& sf = *d.stencils;
  const auto rev = detail::reverse_stencil(g, sf);
  const auto stop = detail::stop_flags(g, constraints.stop_set);

  detail::MinHeap heap;
  for (Point s : sources) {
    if (!g.contains(s)) throw ParameterError("source outside the grid");
    if (cc.blocked(s)) throw ParameterError("source inside an obstacle or barrier");
    const std::uint32_t i = d.index(s);
    if (d.U[i] == 0.0) continue;
    d.U[i] = 0.0;
    d.state[i] = NodeState::Trial;
    d.sources.push_back(i);
    heap.push({0.0, i});
  }

  while (!heap.empty()) {
    const auto [val, i] = heap.top();
    heap.pop();
    if (d.state[i] == NodeState::Accepted || val > d.U[i]) continue;
    d.state[i] = NodeState::Accepted;
    d.rank[i] = d.accepted++;
    if (stop[i]) {
      d.stop_node = i;
      break;
    }
    const double um = d.U[i];
    for (std::uint32_t r = rev.begin[i]; r < rev.begin[i + 1]; ++r) {
      const auto [ni, j] = rev.entries[r];
      if (d.state[ni] == NodeState::Accepted) continue;
      const Point xn = d.point(ni);
      if (cc.blocked(xn)) continue;
      const Point pm = d.point(i);
      if (!cc.lattice_segment_ok(xn, pm, xn, sf.edge_pixels(ni, j))) continue;

      const Vec2 e1 = sf.offset(ni, j).vec();
      double best = um + metric.eval(xn, -e1);
      ParentLink link{i, kNoNode, 0.0};
      // Simplices (j, next) and (prev, j); the partner must already be final.
      for (int side = 0; side < 2; ++side) {
        const std::size_t jj = side == 0 ? sf.next(ni, j) : sf.prev(ni, j);
        const Point e2p = sf.offset(ni, jj);
        const Point y2{xn.x + e2p.x, xn.y + e2p.y};
        if (!g.contains(y2)) continue;
        const std::uint32_t i2 = d.index(y2);
        if (d.state[i2] != NodeState::Accepted || !std::isfinite(d.U[i2])) continue;
        if (!cc.lattice_segment_ok(xn, y2, xn, sf.edge_pixels(ni, jj))) continue;
        const std::size_t rim = side == 0 ? j : jj;
        const Point r1{xn.x + sf.offset(ni, rim).x, xn.y + sf.offset(ni, rim).y};
        const std::size_t rn = sf.next(ni, rim);
        const Point r2{xn.x + sf.offset(ni, rn).x, xn.y + sf.offset(ni, rn).y};
        if (!cc.lattice_segment_ok(r1, r2, xn, sf.rim_pixels(ni, rim)) || !cc.simplex_ok_at_z(xn, r1, r2)) continue;
        const Vec2 e2 = e2p.vec();
        const double u2 = d.U[i2];
        auto f = [&](double s) { return (1.0 - s) * um + s * u2 + metric.eval(xn, -((1.0 - s) * e1 + s * e2)); };
        const auto [s, v] = detail::minimize_unit_interval(f);
        if (v < best) {
          best = v;
          link = s >= 1.0 ? ParentLink{i2, kNoNode, 0.0} : ParentLink{i, i2, s};
        }
      }
      best = std::max(best, um);
      if (best < d.U[ni]) {
        d.U[ni] = best;
        d.parent[ni] = link;
        d.state[ni] = NodeState::Trial;
        heap.push({best, ni});
      }
    }
  }
  return d;
}

// Orientation-lifted variant for the curvature metrics. A node (x, k) is
// reached from the point of the segment [x - e_a, x - e_b] at level k - d
// (d in {-1,0,1}) lying on the ray x - t n(theta_k), where e_a, e_b is the
// stencil cone containing theta_k, or from x - e_a or x - e_b alone (the
// nearest forward offsets, charged as if aligned). With the Reeds-Shepp
// forward model, pure rotations (x, k +- 1) are also allowed.
inline DistanceMap solve_lifted(const MetricField& metric, const std::vector<LiftedSource>& sources,
                                const ConstraintSet& constraints, const SolverOptions& opts = {}) {
  if (!metric.lifted()) throw ParameterError("solve_lifted needs a curvature metric");
  if (sources.empty()) throw ParameterError("no source points");
  const GridGeometry& g = metric.geometry();
  const int nt = metric.n_theta();
  const OrientedGridGeometry og(g, nt);
  const Stencil st(opts.stencil_radius);
  const ConstraintChecker cc(g, constraints);
  DistanceMap d = detail::make_map(g, nt);
  const auto stop = detail::stop_flags(g, constraints.stop_set);
  const double dtheta = og.step();
  const double sexp = curvature_exponent(metric.model());
  const bool rotations = metric.model() == CurvatureModel::ReedsSheppForward;
  const double beta = metric.beta();
  const auto& P = metric.potential();

  struct Level {
    Stencil::Bracket br;
    double len;
  };
  std::vector<Level> levels;
  for (int k = 0; k < nt; ++k) {
    const auto br = st.bracket(og.theta(k));
    const Vec2 v = (1.0 - br.s) * st[br.a].vec() + br.s * st[br.b].vec();
    levels.push_back({br, norm(v)});
  }
  // Curvature factor for angular steps d = 0, +-1 along a displacement of length len.
  auto factor = [&](int dd, double len) {
    const double nu = dd * dtheta;
    return std::pow(1.0 + beta * nu * nu / (len * len), sexp) * len;
  };

  detail::MinHeap heap;
  for (const auto& s : sources) {
    if (!g.contains(s.p)) throw ParameterError("source outside the grid");
    if (cc.blocked(s.p)) throw ParameterError("source inside an obstacle or barrier");
    const std::uint32_t i = d.index(s.p, og.wrap(s.k));
    if (d.U[i] == 0.0) continue;
    d.U[i] = 0.0;
    d.state[i] = NodeState::Trial;
    d.sources.push_back(i);
    heap.push({0.0, i});
  }

  auto edge_ok = [&](Point x, std::size_t j) {
    const Point y{x.x - st[j].x, x.y - st[j].y};
    return cc.lattice_segment_ok(x, y, y, st.edge_pixels(j));
  };
  auto rim_ok = [&](Point x, std::size_t a) {
    const Point y1{x.x - st[a].x, x.y - st[a].y};
    const std::size_t b = st.next(a);
    const Point y2{x.x - st[b].x, x.y - st[b].y};
    // rim pixels of offsets (a, b) mirrored through x
    if (cc.crosses_cut(y1.vec(), y2.vec()) || !cc.simplex_ok_at_z(x, y1, y2)) return false;
    for (Point r : st.rim_pixels(a)) {
      const Point p{x.x - r.x, x.y - r.y};
      if (!g.contains(p) || cc.blocked(p)) return false;
    }
    return true;
  };

  auto relax = [&](std::uint32_t ni, double v, ParentLink link, double floor) {
    v = std::max(v, floor);
    if (v < d.U[ni]) {
      d.U[ni] = v;
      d.parent[ni] = link;
      d.state[ni] = NodeState::Trial;
      heap.push({v, ni});
    }
  };

  while (!heap.empty()) {
    const auto [val, i] = heap.top();
    heap.pop();
    if (d.state[i] == NodeState::Accepted || val > d.U[i]) continue;
    d.state[i] = NodeState::Accepted;
    d.rank[i] = d.accepted++;
    const Point pm = d.point(i);
    const int jm = d.level(i);
    if (stop[g.index(pm)]) {
      d.stop_node = i;
      break;
    }
    const double um = d.U[i];

    for (int dd = -1; dd <= 1; ++dd) {
      const int k = og.wrap(jm + dd);
      const Level& lv = levels[k];
      const bool single = lv.br.s == 0.0;
      for (int which = 0; which < (single ? 1 : 2); ++which) {
        const std::size_t j = which == 0 ? lv.br.a : lv.br.b;
        const Point x{pm.x + st[j].x, pm.y + st[j].y};
        if (!g.contains(x) || cc.blocked(x)) continue;
        const std::uint32_t ni = d.index(x, k);
        if (d.state[ni] == NodeState::Accepted) continue;
        const double w = metric.weight_at(x) * P(x.x, x.y, k);
        // Edge update along the offset itself, then the simplex update when the
        // bracket partner is final too.
        if (!edge_ok(x, j)) continue;
        const double len_j = norm(st[j].vec());
        relax(ni, um + w * factor(dd, len_j), {i, kNoNode, 0.0}, um);
        if (single) continue;
        const Point ya{x.x - st[lv.br.a].x, x.y - st[lv.br.a].y};
        const Point yb{x.x - st[lv.br.b].x, x.y - st[lv.br.b].y};
        if (!g.contains(ya) || !g.contains(yb)) continue;
        const std::uint32_t ia = d.index(ya, jm);
        const std::uint32_t ib = d.index(yb, jm);
        if (d.state[ia] != NodeState::Accepted || d.state[ib] != NodeState::Accepted) continue;
        if (!edge_ok(x, lv.br.a) || !edge_ok(x, lv.br.b) || !rim_ok(x, lv.br.a)) continue;
        const double v = (1.0 - lv.br.s) * d.U[ia] + lv.br.s * d.U[ib] + w * factor(dd, lv.len);
        relax(ni, v, {ia, ib, lv.br.s}, um);
      }
    }
    if (rotations) {
      for (int dd : {-1, 1}) {
        const int k = og.wrap(jm + dd);
        const std::uint32_t ni = d.index(pm, k);
        if (d.state[ni] == NodeState::Accepted) continue;
        const double w = metric.weight_at(pm) * P(pm.x, pm.y, k);
        relax(ni, um + w * std::sqrt(beta) * dtheta, {i, kNoNode, 0.0}, um);
      }
    }
  }
  return d;
}

// Exact shortest paths on the planar stencil graph (the same adaptive
// stencils and pruning as solve); the edge x + e_j -> x costs metric(x, -e_j).
inline DistanceMap dijkstra_oracle(const MetricField& metric, const std::vector<Point>& sources,
                                   const ConstraintSet& constraints, const SolverOptions& opts = {}) {
  if (metric.lifted()) throw ParameterError("the oracle handles planar metrics only");
  const GridGeometry& g = metric.geometry();
  const ConstraintChecker cc(g, constraints);
  DistanceMap d = detail::make_map(g, 0);
  d.stencils = planar_stencils(metric, opts);
  const StencilField& sf = *d.stencils;
  const auto rev = detail::reverse_stencil(g, sf);
  detail::MinHeap heap;
  for (Point s : sources) {
    if (!g.contains(s) || cc.blocked(s)) throw ParameterError("invalid source");
    const std::uint32_t i = d.index(s);
    d.U[i] = 0.0;
    d.sources.push_back(i);
    heap.push({0.0, i});
  }
  while (!heap.empty()) {
    const auto [val, i] = heap.top();
    heap.pop();
    if (d.state[i] == NodeState::Accepted || val > d.U[i]) continue;
    d.state[i] = NodeState::Accepted;
    d.rank[i] = d.accepted++;
    const Point pm = d.point(i);
    for (std::uint32_t r = rev.begin[i]; r < rev.begin[i + 1]; ++r) {
      const auto [ni, j] = rev.entries[r];
      const Point xn = d.point(ni);
      if (d.state[ni] == NodeState::Accepted || cc.blocked(xn)) continue;
      if (!cc.lattice_segment_ok(xn, pm, xn, sf.edge_pixels(ni, j))) continue;
      const double v = val + metric.eval(xn, -sf.offset(ni, j).vec());
      if (v < d.U[ni]) {
        d.U[ni] = v;
        d.parent[ni] = {i, kNoNode, 0.0};
        heap.push({v, ni});
      }
    }
  }
  return d;
}

}  // namespace geoseg
