#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/path.hpp"

namespace geoseg {

// Fixed neighbourhood of primitive integer offsets with max(|i|,|j|) <= radius,
// ordered counter-clockwise by angle starting from (1,0). Consecutive offsets
// span unit-determinant simplices.
class Stencil {
 public:
  explicit Stencil(int radius = 2) : radius_(radius) {
    if (radius < 1 || radius > 5) throw ParameterError("stencil radius must lie in [1,5]");
    for (int j = -radius; j <= radius; ++j)
      for (int i = -radius; i <= radius; ++i)
        if ((i != 0 || j != 0) && std::gcd(i, j) == 1) offsets_.push_back({i, j});
    std::sort(offsets_.begin(), offsets_.end(), [](Point a, Point b) { return angle(a) < angle(b); });
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      const Point a = offsets_[j];
      const Point b = offsets_[next(j)];
      if (a.x * b.y - a.y * b.x != 1) throw NumericalError("stencil simplex is not unimodular");
      edge_pixels_.push_back(segment_pixels({0.0, 0.0}, a.vec()));
      rim_pixels_.push_back(segment_pixels(a.vec(), b.vec()));
    }
  }

  int radius() const { return radius_; }
  std::size_t size() const { return offsets_.size(); }
  Point operator[](std::size_t j) const { return offsets_[j]; }
  const std::vector<Point>& offsets() const { return offsets_; }
  std::size_t next(std::size_t j) const { return (j + 1) % offsets_.size(); }
  std::size_t prev(std::size_t j) const { return (j + offsets_.size() - 1) % offsets_.size(); }

  // Pixels touched by the segment 0 -> offset j, relative to its start.
  const std::vector<Point>& edge_pixels(std::size_t j) const { return edge_pixels_[j]; }
  // Pixels touched by the segment offset j -> offset next(j).
  const std::vector<Point>& rim_pixels(std::size_t j) const { return rim_pixels_[j]; }

  // Angle in [0, 2pi).
  static double angle(Point e) {
    const double a = std::atan2(static_cast<double>(e.y), static_cast<double>(e.x));
    return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
  }

  struct Bracket {
    std::size_t a;
    std::size_t b;
    double s;  // (1-s) e_a + s e_b is parallel to n(theta), s in [0,1)
  };

  // The consecutive pair whose cone contains direction theta.
  Bracket bracket(double theta) const {
    const Vec2 n = direction(theta);
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      const Vec2 ea = offsets_[j].vec();
      const Vec2 eb = offsets_[next(j)].vec();
      const double ca = cross(n, ea);
      const double cb = cross(n, eb);
      if (ca <= 0.0 && cb > 0.0 && dot(n, ea) + dot(n, eb) > 0.0) {
        const double s = ca == 0.0 ? 0.0 : ca / (ca - cb);
        // snap directions that are aligned up to rounding
        if (s < 1e-9) return {j, next(j), 0.0};
        if (s > 1.0 - 1e-9) return {next(j), next(next(j)), 0.0};
        return {j, next(j), s};
      }
    }
    throw NumericalError("no stencil cone contains the direction");
  }

 private:
  int radius_;
  std::vector<Point> offsets_;
  std::vector<std::vector<Point>> edge_pixels_;
  std::vector<std::vector<Point>> rim_pixels_;
};

// Per-node stencils for a norm field N_x. Each node starts from the fixed
// neighbourhood; a consecutive pair (v, w) is split by its mediant v + w until
// both directional derivatives dN_x(v; w) and dN_x(w; v) are >= 0 (which keeps
// the label-setting update causal under strong anisotropy) and the zig-zag
// excess ((1-t) N(v) + t N(w)) / N((1-t) v + t w) stays below 1 + flatness on
// the whole cone. Mediants preserve unit determinants.
// Nodes with equal stencils share storage.
class StencilField {
 public:
  StencilField() = default;

  // norm(node, u) must be a positive 1-homogeneous convex function of u. With
  // `uniform` the norms are taken to be scalar multiples of each other and
  // only node 0 is examined.
  template <typename Norm>
  StencilField(const GridGeometry& g, int radius, Norm&& norm, bool uniform = false, double flatness = 0.03,
               int max_extent = 12)
      : base_(radius), node_shape_(g.size(), 0) {
    std::map<std::vector<std::pair<int, int>>, std::uint32_t> interned;
    std::vector<Point> offs;
    for (std::size_t n = 0; n < (uniform ? std::min<std::size_t>(1, g.size()) : g.size()); ++n) {
      auto N = [&](Vec2 u) { return norm(n, u); };
      offs.clear();
      for (std::size_t j = 0; j < base_.size(); ++j) {
        offs.push_back(base_[j]);
        refine(N, base_[j], base_[base_.next(j)], flatness, max_extent, offs);
      }
      std::vector<std::pair<int, int>> key;
      key.reserve(offs.size());
      for (Point p : offs) key.emplace_back(p.x, p.y);
      auto [it, fresh] = interned.try_emplace(std::move(key), static_cast<std::uint32_t>(shapes_.size()));
      if (fresh) add_shape(offs);
      node_shape_[n] = it->second;
    }
  }

  const Stencil& base() const { return base_; }
  std::size_t shapes() const { return shapes_.size(); }
  std::size_t size(std::size_t node) const { return shapes_[node_shape_[node]].offsets.size(); }
  std::span<const Point> offsets(std::size_t node) const { return shapes_[node_shape_[node]].offsets; }
  Point offset(std::size_t node, std::size_t j) const { return shapes_[node_shape_[node]].offsets[j]; }
  std::size_t next(std::size_t node, std::size_t j) const { return (j + 1) % size(node); }
  std::size_t prev(std::size_t node, std::size_t j) const { return (j + size(node) - 1) % size(node); }
  const std::vector<Point>& edge_pixels(std::size_t node, std::size_t j) const {
    return shapes_[node_shape_[node]].edge_pixels[j];
  }
  const std::vector<Point>& rim_pixels(std::size_t node, std::size_t j) const {
    return shapes_[node_shape_[node]].rim_pixels[j];
  }
  int extent() const { return extent_; }

 private:
  struct Shape {
    std::vector<Point> offsets;
    std::vector<std::vector<Point>> edge_pixels;
    std::vector<std::vector<Point>> rim_pixels;
  };

  template <typename N>
  static double slope(N& norm, Vec2 v, Vec2 w) {
    const double h = 1e-6 * norm_of(v) / norm_of(w);
    return (norm(v + h * w) - norm(v - h * w)) / (2.0 * h);
  }
  static double norm_of(Vec2 v) { return std::hypot(v.x, v.y); }

  // max over t of the excess ratio minus one; the ratio is quasi-concave in t.
  template <typename N>
  static double zigzag_excess(N& norm, Vec2 v, Vec2 w, double nv, double nw) {
    auto ratio = [&](double t) { return ((1.0 - t) * nv + t * nw) / norm((1.0 - t) * v + t * w); };
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - kInvPhi, x2 = kInvPhi;
    double f1 = ratio(x1), f2 = ratio(x2);
    for (int it = 0; it < 30; ++it) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - kInvPhi * (hi - lo);
        f1 = ratio(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + kInvPhi * (hi - lo);
        f2 = ratio(x2);
      }
    }
    return std::max(f1, f2) - 1.0;
  }

  template <typename N>
  static void refine(N& norm, Point v, Point w, double flatness, int max_extent, std::vector<Point>& out) {
    const Point m{v.x + w.x, v.y + w.y};
    if (std::max(std::abs(m.x), std::abs(m.y)) > max_extent) return;
    const double nv = norm(v.vec()), nw = norm(w.vec());
    const double tol = 1e-9 * (nv + nw);
    if (slope(norm, v.vec(), w.vec()) >= -tol && slope(norm, w.vec(), v.vec()) >= -tol &&
        zigzag_excess(norm, v.vec(), w.vec(), nv, nw) <= flatness)
      return;
    refine(norm, v, m, flatness, max_extent, out);
    out.push_back(m);
    refine(norm, m, w, flatness, max_extent, out);
  }

  void add_shape(const std::vector<Point>& offs) {
    Shape sh;
    sh.offsets = offs;
    for (std::size_t j = 0; j < offs.size(); ++j) {
      const Point a = offs[j];
      const Point b = offs[(j + 1) % offs.size()];
      sh.edge_pixels.push_back(segment_pixels({0.0, 0.0}, a.vec()));
      sh.rim_pixels.push_back(segment_pixels(a.vec(), b.vec()));
      extent_ = std::max({extent_, std::abs(a.x), std::abs(a.y)});
    }
    shapes_.push_back(std::move(sh));
  }

  Stencil base_;
  std::vector<std::uint32_t> node_shape_;
  std::vector<Shape> shapes_;
  int extent_ = 0;
};

}  // namespace geoseg
