#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "geoseg/constraints.hpp"
#include "geoseg/eikonal.hpp"
#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/metrics.hpp"
#include "geoseg/path.hpp"

namespace geoseg {

inline constexpr double kPsiAtLandmark = 1e12;

struct RegionTermParams {
  double mu = 0.1;
  double T = 0.5;
  double tau = 5.0;
  double tau_eps = 0.99;

  void validate() const {
    if (!(mu >= 0.0)) throw ParameterError("mu must be >= 0");
    if (!(T > 0.0)) throw ParameterError("T must be > 0");
    if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
    if (!(tau_eps > 0.0 && tau_eps < 1.0)) throw ParameterError("tau_eps must lie in (0,1)");
  }
};

// phi = exp(tau g) - tau_eps
inline ScalarField edge_indicator(const ScalarField& g, double tau, double tau_eps) {
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
  if (!(tau_eps > 0.0 && tau_eps < 1.0)) throw ParameterError("tau_eps must lie in (0,1)");
  ScalarField phi(g.geometry());
  for (std::size_t i = 0; i < g.size(); ++i) phi.at_index(i) = std::exp(tau * g.at_index(i)) - tau_eps;
  return phi;
}

// Sublevel set {U <= T} of the isotropic distance with speed phi from the seeds.
inline RegionMask initial_shape(const std::vector<Point>& seeds, const ScalarField& phi, double T,
                                const RegionMask& barriers = {}, const SolverOptions& opts = {}) {
  if (!(T > 0.0)) throw ParameterError("T must be > 0");
  if (seeds.empty()) throw ParameterError("no seed points");
  ConstraintSet c;
  c.barriers = barriers;
  const DistanceMap d = solve(MetricField::isotropic(phi), seeds, c, opts);
  RegionMask r(phi.geometry(), 0);
  for (std::size_t i = 0; i < r.size(); ++i) r.at_index(i) = d.U[i] <= T ? 1 : 0;
  return r;
}

inline ScalarField shape_gradient_pc(const Image& img, const RegionMask& R0) {
  if (!img.geometry().same_shape(R0.geometry())) throw ParameterError("image/region grid mismatch");
  const std::size_t n_in = count(R0);
  if (n_in == 0) throw DegenerateRegionError("initial region is empty");
  if (n_in == R0.size()) throw DegenerateRegionError("initial region covers the whole image");
  const int m = img.channels();
  std::vector<double> c1(m, 0.0), c2(m, 0.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < m; ++c) (R0(x, y) ? c1 : c2)[c] += img(x, y, c);
  const double n_out = static_cast<double>(R0.size() - n_in);
  for (int c = 0; c < m; ++c) {
    c1[c] /= static_cast<double>(n_in);
    c2[c] /= n_out;
  }
  ScalarField xi(img.geometry());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double a = 0.0, b = 0.0;
      for (int c = 0; c < m; ++c) {
        const double v = img(x, y, c);
        a += (v - c1[c]) * (v - c1[c]);
        b += (v - c2[c]) * (v - c2[c]);
      }
      xi(x, y) = a - b;
    }
  }
  return xi;
}

inline constexpr std::array<Point, 4> kNeighbors4{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
inline constexpr std::array<Point, 8> kNeighbors8{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

// 4-connected component of {xi <= 0} union R0 that contains z.
inline RegionMask theta_z(const ScalarField& xi, const RegionMask& R0, Point z) {
  const GridGeometry& g = xi.geometry();
  if (!g.contains(z)) throw ParameterError("landmark outside the grid");
  if (!g.same_shape(R0.geometry())) throw ParameterError("velocity/region grid mismatch");
  auto in_set = [&](Point p) { return xi[p] <= 0.0 || R0[p] != 0; };
  if (!in_set(z)) throw ParameterError("landmark is not in the initial region");
  RegionMask out(g, 0);
  std::deque<Point> queue{z};
  out[z] = 1;
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (Point d : kNeighbors4) {
      const Point q{p.x + d.x, p.y + d.y};
      if (g.contains(q) && !out[q] && in_set(q)) {
        out[q] = 1;
        queue.push_back(q);
      }
    }
  }
  return out;
}

// Mask with every hole filled: pixels not 8-reachable from outside the grid
// through background pixels.
inline RegionMask fill_holes(const RegionMask& mask) {
  const GridGeometry& g = mask.geometry();
  const int W = g.width + 2, H = g.height + 2;
  std::vector<std::uint8_t> outside(static_cast<std::size_t>(W) * H, 0);
  auto fg = [&](int x, int y) { return x >= 1 && y >= 1 && x <= g.width && y <= g.height && mask(x - 1, y - 1); };
  std::deque<Point> queue{{0, 0}};
  outside[0] = 1;
  while (!queue.empty()) {
    const Point p = queue.front();
    queue.pop_front();
    for (Point d : kNeighbors8) {
      const Point q{p.x + d.x, p.y + d.y};
      if (q.x < 0 || q.y < 0 || q.x >= W || q.y >= H) continue;
      const std::size_t qi = static_cast<std::size_t>(q.y) * W + q.x;
      if (outside[qi] || fg(q.x, q.y)) continue;
      outside[qi] = 1;
      queue.push_back(q);
    }
  }
  RegionMask filled(g, 0);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) filled(x, y) = outside[static_cast<std::size_t>(y + 1) * W + x + 1] ? 0 : 1;
  return filled;
}

// Moore-neighbour trace of the outer boundary of a connected mask; holes are
// ignored. Vertices are pixel centres in counter-clockwise order (positive
// signed area), without repeating the first vertex.
inline std::vector<Vec2> outer_boundary(const RegionMask& mask) {
  const RegionMask filled = fill_holes(mask);
  const GridGeometry& g = filled.geometry();
  auto inside = [&](Point p) { return g.contains(p) && filled[p]; };
  Point s{-1, -1};
  for (int y = 0; y < g.height && s.x < 0; ++y)
    for (int x = 0; x < g.width; ++x)
      if (filled(x, y)) {
        s = {x, y};
        break;
      }
  if (s.x < 0) throw DegenerateRegionError("empty region has no boundary");

  auto dir_index = [](Point d) {
    for (int i = 0; i < 8; ++i)
      if (kNeighbors8[i] == d) return i;
    return -1;
  };
  // Scan the 8-ring of `cur` starting after the background pixel in direction
  // `back`; returns the first foreground neighbour and the new back direction.
  auto step = [&](Point cur, int back, Point& next, int& next_back) {
    for (int t = 1; t <= 8; ++t) {
      const int di = (back + t) % 8;
      const Point q{cur.x + kNeighbors8[di].x, cur.y + kNeighbors8[di].y};
      if (inside(q)) {
        const int pi = (back + t - 1) % 8;
        const Point pb{cur.x + kNeighbors8[pi].x, cur.y + kNeighbors8[pi].y};
        next = q;
        next_back = dir_index({pb.x - q.x, pb.y - q.y});
        return true;
      }
    }
    return false;
  };

  std::vector<Point> chain{s};
  Point first{};
  int back = 4;  // west of the first raster pixel is background
  int nb = 0;
  if (!step(s, back, first, nb)) return {s.vec()};
  Point cur = first;
  back = nb;
  const std::size_t guard = 8 * g.size() + 8;
  for (std::size_t it = 0; it < guard; ++it) {
    Point nx{};
    if (!step(cur, back, nx, nb)) break;
    if (cur == s && nx == first) break;
    chain.push_back(cur);
    cur = nx;
    back = nb;
  }
  std::vector<Vec2> poly;
  poly.reserve(chain.size());
  for (Point p : chain) poly.push_back(p.vec());
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  return poly;
}

namespace detail {

// Lower envelope of parabolas (q - v)^2 + f(v) along one line. Missing sites
// carry a large finite value so the envelope arithmetic stays finite.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v, std::vector<double>& zb) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  zb[0] = -std::numeric_limits<double>::infinity();
  zb[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= zb[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    zb[k] = s;
    zb[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (zb[k + 1] < q) ++k;
    const double d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace detail

// Exact Euclidean distance from every pixel to the nearest site pixel, by the
// two-pass separable squared distance transform.
inline ScalarField distance_to_sites(const std::vector<Point>& sites, const GridGeometry& g) {
  if (sites.empty()) throw DegenerateRegionError("distance transform needs at least one site");
  const int W = g.width, H = g.height;
  std::vector<double> grid(g.size(), 1e20);
  for (Point p : sites)
    if (g.contains(p)) grid[g.index(p)] = 0.0;
  const int n = std::max(W, H);
  std::vector<double> f(n), out(n), zb(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < W; ++x) {
    f.resize(H);
    out.resize(H);
    for (int y = 0; y < H; ++y) f[y] = grid[static_cast<std::size_t>(y) * W + x];
    detail::edt_1d(f, out, v, zb);
    for (int y = 0; y < H; ++y) grid[static_cast<std::size_t>(y) * W + x] = out[y];
  }
  for (int y = 0; y < H; ++y) {
    f.resize(W);
    out.resize(W);
    for (int x = 0; x < W; ++x) f[x] = grid[static_cast<std::size_t>(y) * W + x];
    detail::edt_1d(f, out, v, zb);
    for (int x = 0; x < W; ++x) grid[static_cast<std::size_t>(y) * W + x] = out[x];
  }
  ScalarField D(g);
  for (std::size_t i = 0; i < g.size(); ++i) D.at_index(i) = std::sqrt(grid[i]) * g.spacing;
  return D;
}

inline ScalarField distance_to_boundary(const std::vector<Vec2>& boundary, const GridGeometry& g) {
  std::vector<Point> sites;
  sites.reserve(boundary.size());
  for (Vec2 v : boundary) sites.push_back(round_point(v));
  return distance_to_sites(sites, g);
}

// psi(x) = exp(mu D(x)) / max(|x - z|, h), with a large finite value at z.
inline ScalarField psi_weight(const ScalarField& D, Point z, double mu) {
  if (!(mu >= 0.0)) throw ParameterError("mu must be >= 0");
  const GridGeometry& g = D.geometry();
  if (!g.contains(z)) throw ParameterError("landmark outside the grid");
  ScalarField psi(g);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const double r = std::hypot(x - z.x, y - z.y) * g.spacing;
      psi(x, y) = std::exp(mu * D(x, y)) / std::max(r, g.spacing);
    }
  psi[z] = kPsiAtLandmark;
  return psi;
}

struct HomogeneityField {
  RegionMask R0;
  ScalarField xi;
  RegionMask theta_z;
  std::vector<Vec2> boundary;
  ScalarField D;
  ScalarField psi;
};

inline HomogeneityField compute_homogeneity(const Image& img, const ScalarField& g, const std::vector<Point>& seeds,
                                            Point z, const RegionTermParams& p, const RegionMask& barriers = {},
                                            const SolverOptions& opts = {}) {
  p.validate();
  HomogeneityField h;
  h.R0 = initial_shape(seeds, edge_indicator(g, p.tau, p.tau_eps), p.T, barriers, opts);
  h.xi = shape_gradient_pc(img, h.R0);
  h.theta_z = theta_z(h.xi, h.R0, z);
  h.boundary = outer_boundary(h.theta_z);
  h.D = distance_to_boundary(h.boundary, img.geometry());
  h.psi = psi_weight(h.D, z, p.mu);
  return h;
}

}  // namespace geoseg
