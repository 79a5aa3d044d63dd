#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "geoseg/dualcut.hpp"
#include "geoseg/eikonal.hpp"
#include "geoseg/eval.hpp"
#include "geoseg/metrics.hpp"

namespace testsupport {

using namespace geoseg;

// ---- scenes --------------------------------------------------------------

inline SynthImage disk_scene(double variance = 0.0, std::uint64_t seed = 0) {
  SynthSpec sp;
  sp.background = 0.2;
  sp.shapes.push_back(Shape::disk({64, 64}, 40, 0.8));
  sp.noise_variance = variance;
  sp.seed = seed;
  return synth_image(sp);
}

// Two disks joined by a bar whose lower edge sits above the landmark row, so
// the outline dips below and rises above the negative half-axis: three
// crossings to the left of z = (70, 64).
inline SynthImage peanut_scene() {
  SynthSpec sp;
  sp.background = 0.2;
  sp.shapes.push_back(Shape::disk({70, 64}, 24, 0.8));
  sp.shapes.push_back(Shape::disk({24, 64}, 14, 0.8));
  sp.shapes.push_back(Shape::poly({{22, 36}, {70, 36}, {70, 50}, {22, 50}}, 0.8));
  return synth_image(sp);
}
inline constexpr Point kPeanutZ{70, 64};

// Target ellipse in the lower half with the highest gray level, and a
// slightly darker cap hugging its upper half 1.5 px away. Edge cues alone
// merge the two; the region term keeps only the target.
inline SynthImage two_region_scene() {
  SynthSpec sp;
  sp.background = 0.1;
  const double cx = 64, cy = 88, rx = 38, ry = 22, gap = 1.5, thick = 24;
  sp.shapes.push_back(Shape::ellipse({cx, cy}, rx, ry, 0.0, 0.9));
  std::vector<Vec2> cap;
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const double t = std::numbers::pi * i / n;
    cap.push_back({cx + (rx + gap) * std::cos(t), cy - (ry + gap) * std::sin(t)});
  }
  for (int i = n; i >= 0; --i) {
    const double t = std::numbers::pi * i / n;
    cap.push_back({cx + (rx + gap + thick) * std::cos(t), cy - (ry + gap + thick) * std::sin(t)});
  }
  sp.shapes.push_back(Shape::poly(cap, 0.75, false));
  return synth_image(sp);
}
inline constexpr Point kTwoRegionZ{64, 88};

struct NamedScene {
  std::string name;
  SynthImage scene;
  Point z;
};

// Ten shapes for the topology suite.
inline std::vector<NamedScene> topology_suite() {
  std::vector<NamedScene> out;
  auto one = [](std::vector<Shape> shapes, double bg = 0.2) {
    SynthSpec sp;
    sp.background = bg;
    sp.shapes = std::move(shapes);
    return synth_image(sp);
  };
  out.push_back({"disk", disk_scene(), {64, 64}});
  out.push_back({"ellipse", one({Shape::ellipse({64, 64}, 48, 26, 0.0, 0.8)}), {64, 64}});
  out.push_back({"tilted_ellipse", one({Shape::ellipse({64, 64}, 44, 22, 0.6, 0.8)}), {60, 62}});
  out.push_back({"peanut", peanut_scene(), kPeanutZ});
  // concave blob: a C opening to the left
  out.push_back({"concave_blob",
                 one({Shape::poly({{30, 24}, {100, 24}, {100, 104}, {30, 104}, {30, 84}, {70, 84}, {70, 44}, {30, 44}},
                                  0.8)}),
                 {85, 64}});
  out.push_back({"square", one({Shape::poly({{34, 34}, {94, 34}, {94, 94}, {34, 94}}, 0.8)}), {64, 64}});
  out.push_back({"triangle", one({Shape::poly({{20, 100}, {108, 100}, {64, 20}}, 0.8)}), {64, 72}});
  out.push_back({"small_disk", one({Shape::disk({50, 70}, 18, 0.8)}), {50, 70}});
  out.push_back({"dark_disk", one({Shape::disk({64, 64}, 36, 0.15)}, 0.7), {64, 64}});
  out.push_back({"two_region", two_region_scene(), kTwoRegionZ});
  return out;
}

// ---- geometry oracles ----------------------------------------------------

// Does the segment [a,b] cross the half-axis {z + (t,0) : sign*t >= 0}? The
// axis is attached to the side y >= z.y for the positive ray and y <= z.y for
// the negative one, matching the one-sided cut of the solver.
inline bool crosses_half_axis(Vec2 a, Vec2 b, Point z, int sign) {
  const double ya = a.y - z.y, yb = b.y - z.y;
  auto upper = [&](double y) { return sign > 0 ? y >= 0.0 : y <= 0.0; };
  if (upper(ya) == upper(yb)) return false;
  const double t = ya == yb ? a.x - z.x : (a.x - z.x) + (0.0 - ya) * ((b.x - z.x) - (a.x - z.x)) / (yb - ya);
  return sign > 0 ? t >= 0.0 : t <= 0.0;
}

inline bool proper_intersection(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return v > 1e-12 ? 1 : (v < -1e-12 ? -1 : 0);
  };
  const int d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const int d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

// O(n^2) check over non-adjacent edges of a closed polyline.
inline bool brute_simple(const std::vector<Vec2>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (proper_intersection(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  return true;
}

// Winding number by summing signed angles.
inline int angle_winding(const std::vector<Vec2>& v, Vec2 p) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i] - p, b = v[(i + 1) % v.size()] - p;
    total += std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// Pixels visited when walking the segment in steps of 1/20 px.
inline std::vector<Point> sampled_pixels(Vec2 a, Vec2 b) {
  std::vector<Point> out;
  const int n = std::max(1, static_cast<int>(std::ceil(norm(b - a) * 20.0)));
  for (int k = 0; k <= n; ++k) out.push_back(round_point(a + (static_cast<double>(k) / n) * (b - a)));
  return out;
}

// ---- graph oracle ----------------------------------------------------------

// Plain Dijkstra on the stencil graph of `sf`: the edge from x + e to x costs
// metric(x, -e). No pruning.
inline std::vector<double> stencil_dijkstra(const MetricField& m, const StencilField& sf, Point src) {
  const GridGeometry& g = m.geometry();
  // forward adjacency: y -> (x, cost) for every x with y = x + e_j(x)
  std::vector<std::vector<std::pair<std::size_t, double>>> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Point x = g.point(n);
    for (Point e : sf.offsets(n)) {
      const Point y{x.x + e.x, x.y + e.y};
      if (g.contains(y)) out[g.index(y)].push_back({n, m.eval(x, -e.vec())});
    }
  }
  std::vector<double> dist(g.size(), kInfinity);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.index(src)] = 0.0;
  pq.push({0.0, g.index(src)});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : out[u])
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
  }
  return dist;
}

// Sum of metric(x_i, x_i - x_{i-1}) over a node path.
inline double line_integral(const GeodesicPath& p, const MetricField& m) {
  double c = 0.0;
  for (std::size_t i = 1; i < p.vertices.size(); ++i) {
    const Point x{static_cast<int>(p.vertices[i].x), static_cast<int>(p.vertices[i].y)};
    c += m.eval(x, p.vertices[i] - p.vertices[i - 1]);
  }
  return c;
}

// Random 12x12 instance for the oracle comparisons: variant 0 isotropic with
// random speeds, 1 Riemannian edge tensor, 2 asymmetric quadratic.
inline MetricField oracle_metric(int variant, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const GridGeometry g(12, 12);
  if (variant == 0) {
    ScalarField sp(g);
    for (double& v : sp.values()) v = 0.5 + u01(rng);
    return MetricField::isotropic(sp);
  }
  Image img(12, 12, 1, 0.0);
  const double cx = u01(rng) * 12, cy = u01(rng) * 12, r = 2 + u01(rng) * 5, a = u01(rng) * 6.3,
               off = u01(rng) * 8 - 4, i1 = u01(rng), i2 = u01(rng);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 12; ++x)
      img.set(x, y, 0,
              0.2 + 0.5 * i1 * (std::hypot(x - cx, y - cy) < r) +
                  0.3 * i2 * ((x - 6) * std::cos(a) + (y - 6) * std::sin(a) > off));
  const EdgeFeatures f = compute_edge_features(img, 1.0);
  const SymTensorField2 M = edge_tangent_tensor(f.W, f.g, -7.0, 0.0);
  if (variant == 1) return MetricField::riemannian(M);
  return MetricField::asym_quadratic(M, asym_vector(f.varpi, 2.0));
}

// ---- contract audits over a segmentation result ----------------------------

struct ContourAudit {
  int barrier_touches = 0;  // contour samples on barrier pixels
  int step2_in_A = 0;       // interior Step-II vertices inside A
  int step2_on_axis = 0;    // interior Step-II vertices on the negative half-axis
  int step2_crossings = 0;  // Step-II edges crossing the negative half-axis
  int step1_crossings = 0;  // Step-I edges crossing the positive half-axis
  bool simple = false;
  int winding = 0;
};

inline ContourAudit audit(const SegmentationResult& r, const RegionMask& barriers) {
  ContourAudit a;
  const auto& v = r.contour.vertices;
  const Point z = r.z;
  if (barriers.size())
    for (std::size_t i = 0; i < v.size(); ++i)
      for (Point p : sampled_pixels(v[i], v[(i + 1) % v.size()])) a.barrier_touches += barriers[p] != 0;
  const auto& gb = r.g_ba.vertices;
  for (std::size_t i = 1; i + 1 < gb.size(); ++i) {
    a.step2_in_A += r.A[round_point(gb[i])] != 0;
    a.step2_on_axis += gb[i].y == z.y && gb[i].x <= z.x;
  }
  // the first and last edges end on the axis by construction
  for (std::size_t i = 1; i + 2 < gb.size(); ++i) a.step2_crossings += crosses_half_axis(gb[i], gb[i + 1], z, -1);
  const auto& gq = r.gq.vertices;
  for (std::size_t i = 1; i + 2 < gq.size(); ++i) a.step1_crossings += crosses_half_axis(gq[i], gq[i + 1], z, +1);
  a.simple = brute_simple(v);
  a.winding = angle_winding(v, z.vec());
  return a;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() /
           ("geoseg_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testsupport
