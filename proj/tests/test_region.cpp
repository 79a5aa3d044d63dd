#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <random>
#include <set>

#include "geoseg/features.hpp"
#include "geoseg/region.hpp"
#include "support.hpp"

using namespace geoseg;

TEST(EdgeIndicator, Examples) {
  ScalarField g(GridGeometry(2, 1));
  g(0, 0) = 0.0;
  g(1, 0) = 1.0;
  const ScalarField phi = edge_indicator(g, 5.0, 0.99);
  EXPECT_NEAR(phi(0, 0), 0.01, 1e-15);
  EXPECT_NEAR(phi(1, 0), std::exp(5.0) - 0.99, 1e-12);
  EXPECT_NEAR(phi(1, 0), 147.42, 0.01);
  ScalarField ramp(GridGeometry(100, 1));
  for (int x = 0; x < 100; ++x) ramp(x, 0) = x / 99.0;
  const ScalarField p = edge_indicator(ramp, 5.0, 0.99);
  for (int x = 1; x < 100; ++x) EXPECT_GT(p(x, 0), p(x - 1, 0));
}

TEST(InitialShape, ConstantImageGivesDisk) {
  const GridGeometry g(301, 301);
  const ScalarField phi(g, 0.01);
  const RegionMask r = initial_shape({{150, 150}}, phi, 1.0);
  // radius 100 within the discretisation error of the solver
  for (int y = 0; y < 301; ++y)
    for (int x = 0; x < 301; ++x) {
      const double d = std::hypot(x - 150, y - 150);
      if (d < 97.0) { EXPECT_TRUE(r(x, y)); }
      if (d > 103.0) { EXPECT_FALSE(r(x, y)); }
    }
}

TEST(InitialShape, TinyThresholdKeepsSeedOnly) {
  const ScalarField phi(GridGeometry(20, 20), 0.01);
  const RegionMask r = initial_shape({{7, 9}}, phi, 1e-9);
  EXPECT_EQ(count(r), 1u);
  EXPECT_TRUE(r(7, 9));
}

TEST(InitialShape, StopsAtTheRim) {
  const auto s = testsupport::disk_scene();
  const auto f = compute_edge_features(s.image, 2.0);
  const ScalarField phi = edge_indicator(f.g, 5.0, 0.99);
  const RegionMask r = initial_shape({{64, 64}}, phi, 0.5);
  // oracle: 8-neighbour Dijkstra on the same phi is an upper bound of the
  // solver distance, so its sublevel set is contained in R0
  const GridGeometry& g = phi.geometry();
  std::vector<double> dist(g.size(), kInfinity);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.index({64, 64})] = 0;
  pq.push({0, g.index({64, 64})});
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    const Point p = g.point(i);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const Point q{p.x + dx, p.y + dy};
        if ((dx == 0 && dy == 0) || !g.contains(q)) continue;
        const double w = d + phi[q] * std::hypot(dx, dy);
        if (w < dist[g.index(q)]) {
          dist[g.index(q)] = w;
          pq.push({w, g.index(q)});
        }
      }
  }
  std::size_t inside_disk = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dist[i] <= 0.5) { EXPECT_TRUE(r.at_index(i)); }
    const Point p = g.point(i);
    const double rr = std::hypot(p.x - 64, p.y - 64);
    if (r.at_index(i)) { EXPECT_LT(rr, 44.0); }  // never past the rim
    if (rr < 30.0) inside_disk += r.at_index(i);
  }
  EXPECT_GT(inside_disk, 0.9 * std::numbers::pi * 30 * 30);
}

TEST(ShapeGradient, ConstantImageIsZero) {
  Image img(10, 10, 1, 0.4);
  RegionMask r(img.geometry(), 0);
  r(3, 3) = 1;
  const ScalarField sg = shape_gradient_pc(img, r);
  for (double v : sg.values()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(ShapeGradient, BinaryImage) {
  Image img(10, 10, 1, 0.0);
  RegionMask r(img.geometry(), 0);
  for (int y = 2; y < 6; ++y)
    for (int x = 3; x < 8; ++x) {
      img.set(x, y, 0, 1.0);
      r(x, y) = 1;
    }
  const ScalarField xi = shape_gradient_pc(img, r);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(xi(x, y), r(x, y) ? -1.0 : 1.0);
}

TEST(ShapeGradient, BruteForceMeans) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Image img(15, 11, 3);
    RegionMask r(img.geometry(), 0);
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 15; ++x) {
        for (int c = 0; c < 3; ++c) img.set(x, y, c, u(rng));
        r(x, y) = u(rng) < 0.3;
      }
    r(0, 0) = 1;
    r(1, 0) = 0;
    const ScalarField xi = shape_gradient_pc(img, r);
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 15; ++x) {
        double expect = 0.0;
        for (int c = 0; c < 3; ++c) {
          double s_in = 0, s_out = 0;
          int n_in = 0, n_out = 0;
          for (int yy = 0; yy < 11; ++yy)
            for (int xx = 0; xx < 15; ++xx) {
              if (r(xx, yy)) {
                s_in += img(xx, yy, c);
                ++n_in;
              } else {
                s_out += img(xx, yy, c);
                ++n_out;
              }
            }
          const double v = img(x, y, c), c1 = s_in / n_in, c2 = s_out / n_out;
          expect += (v - c1) * (v - c1) - (v - c2) * (v - c2);
        }
        EXPECT_NEAR(xi(x, y), expect, 1e-12);
      }
  }
}

TEST(ShapeGradient, DegenerateRegions) {
  Image img(4, 4, 1, 0.5);
  EXPECT_THROW(shape_gradient_pc(img, RegionMask(img.geometry(), 0)), DegenerateRegionError);
  EXPECT_THROW(shape_gradient_pc(img, RegionMask(img.geometry(), 1)), DegenerateRegionError);
}

TEST(ThetaZ, AllNegativeGivesWholeGrid) {
  const GridGeometry g(9, 7);
  const RegionMask t = theta_z(ScalarField(g, -1.0), RegionMask(g, 0), {4, 3});
  EXPECT_EQ(count(t), g.size());
}

TEST(ThetaZ, ComponentRules) {
  const GridGeometry g(20, 10);
  ScalarField xi(g, 1.0);
  RegionMask R0(g, 0);
  // blob 1 at x in [1,5], blob 2 at x in [12,16]
  for (int y = 2; y < 7; ++y)
    for (int x = 1; x <= 5; ++x) xi(x, y) = -1.0;
  for (int y = 2; y < 7; ++y)
    for (int x = 12; x <= 16; ++x) xi(x, y) = -1.0;
  R0(3, 4) = 1;
  const RegionMask a = theta_z(xi, R0, {3, 4});
  EXPECT_EQ(count(a), 25u);
  EXPECT_FALSE(a(14, 4));
  // R0 bridges the two blobs
  for (int x = 5; x <= 12; ++x) R0(x, 4) = 1;
  const RegionMask b = theta_z(xi, R0, {3, 4});
  EXPECT_EQ(count(b), 25u + 25u + 6u);
}

TEST(ThetaZ, MatchesFloodFillOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const GridGeometry g(25, 25);
    ScalarField xi(g);
    RegionMask R0(g, 0);
    for (double& v : xi.values()) v = u(rng);
    for (int y = 10; y < 15; ++y)
      for (int x = 10; x < 15; ++x) R0(x, y) = 1;
    const Point z{12, 12};
    const RegionMask t = theta_z(xi, R0, z);
    // recursive-free DFS oracle
    RegionMask seen(g, 0);
    std::vector<Point> stack{z};
    seen[z] = 1;
    while (!stack.empty()) {
      const Point p = stack.back();
      stack.pop_back();
      for (Point d : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}}) {
        const Point q{p.x + d.x, p.y + d.y};
        if (g.contains(q) && !seen[q] && (xi[q] <= 0 || R0[q])) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_EQ(t.at_index(i), seen.at_index(i));
      if (t.at_index(i) && !R0.at_index(i)) { EXPECT_LE(xi.at_index(i), 0.0); }
    }
  }
}

TEST(OuterBoundary, SmallShapes) {
  const GridGeometry g(7, 7);
  RegionMask sq(g, 0);
  for (int y = 2; y < 5; ++y)
    for (int x = 2; x < 5; ++x) sq(x, y) = 1;
  const auto b = outer_boundary(sq);
  EXPECT_EQ(b.size(), 8u);
  EXPECT_GT(signed_area(b), 0.0);
  std::set<std::pair<int, int>> pts;
  for (Vec2 v : b) pts.insert({static_cast<int>(v.x), static_cast<int>(v.y)});
  EXPECT_EQ(pts.size(), 8u);
  EXPECT_FALSE(pts.count({3, 3}));

  RegionMask ring = sq;
  ring(3, 3) = 0;
  const auto rb = outer_boundary(ring);
  EXPECT_EQ(rb.size(), 8u);
}

TEST(OuterBoundary, EqualsMaskMinusErosion) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const GridGeometry g(48, 48);
    RegionMask m(g, 0);
    // union of overlapping disks chained from the centre: connected
    Vec2 c{24, 24};
    for (int k = 0; k < 5; ++k) {
      const double r = 4 + 6 * u(rng);
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
          if (std::hypot(x - c.x, y - c.y) <= r) m(x, y) = 1;
      c = c + Vec2{(u(rng) - 0.5) * r * 1.5, (u(rng) - 0.5) * r * 1.5};
      c.x = std::clamp(c.x, 6.0, 41.0);
      c.y = std::clamp(c.y, 6.0, 41.0);
    }
    // a hole that must be ignored
    m(24, 24) = 0;
    const RegionMask filled = fill_holes(m);
    std::set<std::pair<int, int>> expect;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        if (!filled(x, y)) continue;
        bool edge = false;
        for (Point d : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}}) {
          const Point q{x + d.x, y + d.y};
          if (!g.contains(q) || !filled[q]) edge = true;
        }
        if (edge) expect.insert({x, y});
      }
    std::set<std::pair<int, int>> got;
    for (Vec2 v : outer_boundary(m)) got.insert({static_cast<int>(v.x), static_cast<int>(v.y)});
    EXPECT_EQ(got, expect) << "trial " << trial;
  }
}

TEST(DistanceToBoundary, Examples) {
  const GridGeometry g(15, 9);
  const ScalarField D = distance_to_boundary({{4, 6}}, g);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 15; ++x) EXPECT_NEAR(D(x, y), std::hypot(x - 4, y - 6), 1e-12);
  EXPECT_EQ(D(4, 6), 0.0);
}

TEST(DistanceToBoundary, BruteForceAndLipschitz) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const GridGeometry g(32, 32);
    std::vector<Vec2> sites;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) sites.push_back({static_cast<double>(rng() % 32), static_cast<double>(rng() % 32)});
    const ScalarField D = distance_to_boundary(sites, g);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        double best = kInfinity;
        for (Vec2 s : sites) best = std::min(best, std::hypot(x - s.x, y - s.y));
        EXPECT_NEAR(D(x, y), best, 1e-9);
        if (x > 0) { EXPECT_LE(std::abs(D(x, y) - D(x - 1, y)), 1.0 + 1e-12); }
        if (y > 0) { EXPECT_LE(std::abs(D(x, y) - D(x, y - 1)), 1.0 + 1e-12); }
      }
  }
}

TEST(PsiWeight, Examples) {
  const GridGeometry g(30, 30);
  const Point z{10, 10};
  const ScalarField D0(g, 3.0);
  const ScalarField p0 = psi_weight(D0, z, 0.0);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      if (Point{x, y} != z) { EXPECT_NEAR(p0(x, y), 1.0 / std::max(std::hypot(x - 10, y - 10), 1.0), 1e-15); }
  EXPECT_GT(p0[z], 1e6);

  ScalarField D(g, 0.0);
  const ScalarField p = psi_weight(D, z, 0.1);
  EXPECT_NEAR(p(20, 10), 0.1, 1e-15);

  // increasing in D at fixed radius
  for (int k = 1; k < 20; ++k) {
    ScalarField a(g, k - 1.0), b(g, static_cast<double>(k));
    EXPECT_GT(psi_weight(b, z, 0.1)(20, 10), psi_weight(a, z, 0.1)(20, 10));
  }
}

TEST(PsiWeight, MinimumAlongRaysAtOrBeforeBoundary) {
  const auto s = testsupport::disk_scene();
  const auto f = compute_edge_features(s.image, 2.0);
  const Point z{64, 64};
  const HomogeneityField h = compute_homogeneity(s.image, f.g, {z}, z, RegionTermParams{});
  for (int a = 0; a < 16; ++a) {
    const double th = 2 * std::numbers::pi * a / 16;
    double best = kInfinity;
    int best_t = -1, first_cross = -1;
    for (int t = 1; t < 60; ++t) {
      const Point p = round_point(Vec2{64.0 + t * std::cos(th), 64.0 + t * std::sin(th)});
      if (!h.psi.geometry().contains(p)) break;
      if (h.psi[p] < best) {
        best = h.psi[p];
        best_t = t;
      }
      if (first_cross < 0 && !h.theta_z[p]) first_cross = t;
    }
    ASSERT_GE(first_cross, 0);
    EXPECT_LE(best_t, first_cross) << "ray " << a;
  }
}
