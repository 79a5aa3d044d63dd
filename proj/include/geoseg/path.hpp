#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"

namespace geoseg {

// Ordered polyline in continuous grid coordinates, optionally lifted with an
// orientation per vertex. `params` holds the parameter u in [0,1] of each
// vertex (cumulative arc length unless set explicitly by concatenation).
struct GeodesicPath {
  std::vector<Vec2> vertices;
  std::vector<double> thetas;  // empty unless lifted
  std::vector<double> params;
  bool closed = false;

  bool lifted() const { return !thetas.empty(); }
  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
  const Vec2& front() const { return vertices.front(); }
  const Vec2& back() const { return vertices.back(); }

  double euclidean_length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) len += norm(vertices[i] - vertices[i - 1]);
    return len;
  }

  // Parameterise by cumulative Euclidean arc length over [0,1].
  void reparameterize() {
    params.assign(vertices.size(), 0.0);
    const double total = euclidean_length();
    double acc = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      acc += norm(vertices[i] - vertices[i - 1]);
      params[i] = total > 0.0 ? acc / total : static_cast<double>(i) / (vertices.size() - 1);
    }
    if (!params.empty()) params.back() = vertices.size() > 1 ? 1.0 : 0.0;
  }

  // Position at parameter u (piecewise linear in the stored params).
  Vec2 at(double u) const {
    if (vertices.empty()) throw ParameterError("empty path");
    if (params.size() != vertices.size()) throw NumericalError("path parameterisation missing");
    if (u <= params.front()) return vertices.front();
    if (u >= params.back()) return vertices.back();
    auto it = std::upper_bound(params.begin(), params.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - params.begin());
    const double span = params[i] - params[i - 1];
    const double t = span > 0.0 ? (u - params[i - 1]) / span : 0.0;
    return vertices[i - 1] + t * (vertices[i] - vertices[i - 1]);
  }

  void reverse() {
    std::reverse(vertices.begin(), vertices.end());
    std::reverse(thetas.begin(), thetas.end());
    reparameterize();
  }
};

// Shoelace signed area of the closed polygon; positive for counter-clockwise
// order in the (x, y) frame.
inline double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

// Winding number of the closed polygon around p. Points on the boundary are
// not special-cased.
inline int winding_number(const std::vector<Vec2>& poly, Vec2 p) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const double side = cross(b - a, p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) ++wn;
    } else if (b.y <= p.y && side < 0.0) {
      --wn;
    }
  }
  return wn;
}

// Even-odd point-in-polygon by ray casting along +x.
inline bool inside_even_odd(const std::vector<Vec2>& poly, Vec2 p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

// Distance from p to the closed polygon boundary.
inline double distance_to_polyline(const std::vector<Vec2>& poly, Vec2 p, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  if (n == 1) return norm(p - poly[0]);
  const std::size_t m = closed ? n : n - 1;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, norm(p - (a + t * ab)));
  }
  return best;
}

// Scanline even-odd fill: pixels whose centre is strictly inside the polygon.
inline RegionMask fill_polygon(const std::vector<Vec2>& poly, const GridGeometry& g) {
  RegionMask m(g, 0);
  const std::size_t n = poly.size();
  if (n < 3) return m;
  std::vector<double> xs;
  for (int y = 0; y < g.height; ++y) {
    xs.clear();
    const double py = y;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 a = poly[i];
      const Vec2 b = poly[j];
      if ((a.y > py) != (b.y > py)) xs.push_back(a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::floor(xs[k])) + 1);
      const int x1 = std::min(g.width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
      for (int x = x0; x <= x1; ++x) {
        if (x > xs[k] && x < xs[k + 1]) m(x, y) = 1;
      }
    }
  }
  // Centres lying exactly on an edge are not strictly inside.
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (m(x, y) && distance_to_polyline(poly, {double(x), double(y)}, true) < 1e-12) m(x, y) = 0;
  return m;
}

// Pixels crossed by a segment between two grid-aligned points, computed
// exactly: every pixel whose open square meets the open segment, plus b.
inline std::vector<Point> segment_pixels(Vec2 a, Vec2 b) {
  std::vector<Point> out;
  const Vec2 d = b - a;
  // Parameter values where the segment crosses pixel boundaries (x = k+0.5).
  std::vector<double> ts{0.0, 1.0};
  auto add_crossings = [&](double p0, double dp) {
    if (dp == 0.0) return;
    const double lo = std::min(p0, p0 + dp);
    const double hi = std::max(p0, p0 + dp);
    for (double k = std::ceil(lo - 0.5) + 0.5; k < hi; k += 1.0) {
      const double t = (k - p0) / dp;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  };
  add_crossings(a.x, d.x);
  add_crossings(a.y, d.y);
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] < 1e-12) continue;
    const Vec2 mid = a + 0.5 * (ts[i] + ts[i + 1]) * d;
    const Point q{static_cast<int>(std::floor(mid.x + 0.5)), static_cast<int>(std::floor(mid.y + 0.5))};
    if (out.empty() || !(out.back() == q)) out.push_back(q);
  }
  const Point pb = round_point(b);
  if (out.empty() || !(out.back() == pb)) out.push_back(pb);
  return out;
}

// Rasterise a polyline into a mask with a 4-connected pixel chain.
inline void draw_polyline(RegionMask& m, const std::vector<Vec2>& pts, bool closed) {
  const auto& g = m.geometry();
  auto mark = [&](Point p) {
    if (g.contains(p)) m[p] = 1;
  };
  if (pts.empty()) return;
  mark(round_point(pts.front()));
  const std::size_t n = pts.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    Point p = round_point(pts[i]);
    const Point q = round_point(pts[(i + 1) % n]);
    // 4-connected grid walk.
    const int dx = std::abs(q.x - p.x);
    const int dy = std::abs(q.y - p.y);
    const int sx = p.x < q.x ? 1 : -1;
    const int sy = p.y < q.y ? 1 : -1;
    mark(p);
    for (int ix = 0, iy = 0; ix < dx || iy < dy;) {
      if (static_cast<long>(1 + 2 * ix) * dy < static_cast<long>(1 + 2 * iy) * dx) {
        p.x += sx;
        ++ix;
      } else {
        p.y += sy;
        ++iy;
      }
      mark(p);
    }
  }
}

// Proper (transversal) intersection test of segments [a,b] and [c,d].
inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// True if the closed polyline has no transversal self-intersections between
// non-adjacent edges.
inline bool is_simple(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 4) return true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace geoseg
