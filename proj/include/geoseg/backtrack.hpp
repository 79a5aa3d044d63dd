#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "geoseg/constraints.hpp"
#include "geoseg/eikonal.hpp"
#include "geoseg/error.hpp"
#include "geoseg/metrics.hpp"
#include "geoseg/path.hpp"
#include "geoseg/stencil.hpp"

namespace geoseg {

namespace detail {

// Shortest-path lengths from the sources over the admissible stencil edges
// between accepted nodes, each edge x -> x + e charged F(x, -e).
inline std::vector<double> lattice_distances(const DistanceMap& d, const MetricField& metric, const StencilField& sf,
                                             const ConstraintChecker& cc) {
  const GridGeometry& g = d.geom;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out(g.size());
  for (std::uint32_t n = 0; n < g.size(); ++n) {
    if (d.state[n] != NodeState::Accepted) continue;
    const Point x = d.point(n);
    const auto offs = sf.offsets(n);
    for (std::size_t j = 0; j < offs.size(); ++j) {
      const Point y{x.x + offs[j].x, x.y + offs[j].y};
      if (!g.contains(y) || d.state[d.index(y)] != NodeState::Accepted) continue;
      if (!cc.lattice_segment_ok(x, y, x, sf.edge_pixels(n, j))) continue;
      out[d.index(y)].push_back({n, metric.eval(x, -offs[j].vec())});
    }
  }
  std::vector<double> L(g.size(), kInfinity);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (std::uint32_t n = 0; n < g.size(); ++n)
    if (d.is_source(n)) {
      L[n] = 0.0;
      pq.push({0.0, n});
    }
  while (!pq.empty()) {
    const auto [l, u] = pq.top();
    pq.pop();
    if (l > L[u]) continue;
    for (const auto& [v, w] : out[u])
      if (l + w < L[v]) {
        L[v] = l + w;
        pq.push({L[v], v});
      }
  }
  return L;
}

}  // namespace detail

// Returns a lattice path from the sources to `start` whose discrete cost is
// the shortest over the admissible stencil edges, hence at least U(start).
// Among equally short predecessors the walk follows a shadow point driven by
// the continuous descent of U: from node x the objective U(y) + F(x, x - y)
// is minimised over the earlier-accepted stencil neighbours and over the
// simplex faces between two of them (U linear on the face), and the walk
// steps to the tied predecessor nearest the shadow. Without the shadow, runs
// of mixed offsets in a uniform metric can be permuted freely and drift away
// from the straight line they approximate.
inline GeodesicPath backtrack(const DistanceMap& d, const MetricField& metric, const ConstraintSet& constraints,
                              Point start, const SolverOptions& opts = {}) {
  if (d.lifted()) throw ParameterError("use backtrack_lifted on lifted distance maps");
  const GridGeometry& g = d.geom;
  if (!g.contains(start)) throw ParameterError("backtrack start outside the grid");
  std::uint32_t n = d.index(start);
  if (!std::isfinite(d.U[n]) || d.state[n] != NodeState::Accepted)
    throw TopologyError("backtrack start was not reached by the front");
  const auto sf = d.stencils ? d.stencils : planar_stencils(metric, opts);
  const ConstraintChecker cc(g, constraints);
  const std::vector<double> L = detail::lattice_distances(d, metric, *sf, cc);
  if (!std::isfinite(L[n])) throw TopologyError("backtrack start has no admissible lattice path to a source");

  std::vector<Vec2> verts{start.vec()};
  Vec2 shadow = start.vec();
  std::vector<std::uint32_t> cand;
  std::vector<double> cost;
  while (!d.is_source(n)) {
    const Point x = d.point(n);
    const auto offs = sf->offsets(n);
    cand.assign(offs.size(), kNoNode);
    cost.assign(offs.size(), kInfinity);
    double best = kInfinity;
    Vec2 step{0.0, 0.0};
    for (std::size_t j = 0; j < offs.size(); ++j) {
      const Point y{x.x + offs[j].x, x.y + offs[j].y};
      if (!g.contains(y)) continue;
      const std::uint32_t yi = d.index(y);
      if (!std::isfinite(L[yi]) || !cc.lattice_segment_ok(x, y, x, sf->edge_pixels(n, j))) continue;
      cost[j] = metric.eval(x, -offs[j].vec());
      if (d.rank[yi] >= d.rank[n]) continue;
      cand[j] = yi;
      if (const double v = d.U[yi] + cost[j]; v < best) {
        best = v;
        step = offs[j].vec();
      }
    }
    for (std::size_t j = 0; j < offs.size(); ++j) {
      const std::size_t k = sf->next(n, j);
      if (cand[j] == kNoNode || cand[k] == kNoNode) continue;
      const Vec2 ej = offs[j].vec(), ek = offs[k].vec();
      const double uj = d.U[cand[j]], uk = d.U[cand[k]];
      const auto [s, v] = detail::minimize_unit_interval(
          [&](double t) { return (1.0 - t) * uj + t * uk + metric.eval(x, -((1.0 - t) * ej + t * ek)); });
      if (s > 0.0 && s < 1.0 && v < best) {
        best = v;
        step = (1.0 - s) * ej + s * ek;
      }
    }

    const Vec2 target = shadow + step;
    const double tol = 1e-10 * (1.0 + L[n]);
    std::uint32_t next = kNoNode;
    double nearest = kInfinity;
    for (std::size_t j = 0; j < offs.size(); ++j) {
      if (!std::isfinite(cost[j])) continue;
      const std::uint32_t yi = d.index({x.x + offs[j].x, x.y + offs[j].y});
      if (L[yi] + cost[j] > L[n] + tol || L[yi] >= L[n]) continue;
      if (const double dist = norm(x.vec() + offs[j].vec() - target); dist < nearest) {
        nearest = dist;
        next = yi;
      }
    }
    if (next == kNoNode)
      throw NumericalError("backtrack stalled at (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                           "), U = " + std::to_string(d.U[n]));
    n = next;
    const Vec2 y = d.point(n).vec();
    shadow = best < kInfinity ? target : y;
    // keep the shadow within a pixel of the walk
    if (const double off = norm(shadow - y); off > 1.0) shadow = y + (1.0 / off) * (shadow - y);
    verts.push_back(y);
  }

  GeodesicPath path;
  path.vertices = std::move(verts);
  path.reverse();
  return path;
}

// Follows the recorded updates on the lifted grid. Every parent was accepted
// strictly before its child, so the walk terminates at a source.
inline GeodesicPath backtrack_lifted(const DistanceMap& d, std::uint32_t start) {
  if (!d.lifted()) throw ParameterError("backtrack_lifted needs a lifted distance map");
  if (start >= d.U.size() || d.state[start] != NodeState::Accepted)
    throw TopologyError("backtrack start was not reached by the front");
  GeodesicPath path;
  std::uint32_t n = start;
  for (std::size_t guard = 0; guard <= d.U.size(); ++guard) {
    path.vertices.push_back(d.point(n).vec());
    path.thetas.push_back(d.theta(n));
    if (d.is_source(n)) {
      path.reverse();
      return path;
    }
    const ParentLink& pl = d.parent[n];
    if (pl.a == kNoNode) throw NumericalError("lifted backtrack hit a node without an update record");
    std::uint32_t m = (pl.b != kNoNode && pl.s >= 0.5) ? pl.b : pl.a;
    if (d.rank[m] >= d.rank[n]) throw NumericalError("lifted backtrack is not descending");
    n = m;
  }
  throw NumericalError("lifted backtrack did not terminate");
}

// Discrete line integral of the metric along the path in its own direction;
// each segment is charged at the pixel nearest to its end point.
inline double path_cost(const GeodesicPath& path, const MetricField& metric) {
  const GridGeometry& g = metric.geometry();
  double c = 0.0;
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    const Point q = round_point(path.vertices[i]);
    const Point qc{std::clamp(q.x, 0, g.width - 1), std::clamp(q.y, 0, g.height - 1)};
    c += metric.eval(qc, path.vertices[i] - path.vertices[i - 1]);
  }
  return c;
}

}  // namespace geoseg
