#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geoseg/features.hpp"
#include "geoseg/metrics.hpp"

using namespace geoseg;

namespace {

constexpr int kSamples = 2000;

struct RandomMetrics {
  GridGeometry g{8, 8};
  std::mt19937_64 rng{12};
  std::uniform_real_distribution<double> u{-1.0, 1.0};

  struct Raw {
    ScalarField sp;
    SymTensorField2 M;
    VectorField2 w;
    LiftedScalarField P;
  };
  Raw raw = make_raw();
  MetricField iso = MetricField::isotropic(raw.sp);
  MetricField riem = MetricField::riemannian(raw.M);
  MetricField aq = MetricField::asym_quadratic(raw.M, raw.w);
  MetricField rsf = MetricField::curvature(raw.P, 100.0, CurvatureModel::ReedsSheppForward);
  MetricField ela = MetricField::curvature(raw.P, 100.0, CurvatureModel::Elastica);

  Raw make_raw() {
    Raw r{ScalarField(g), SymTensorField2(g), VectorField2(g), LiftedScalarField(OrientedGridGeometry(g, 60))};
    for (std::size_t i = 0; i < g.size(); ++i) {
      r.sp.at_index(i) = 0.1 + std::abs(u(rng));
      const double a = u(rng), b = u(rng), c = 0.1 + std::abs(u(rng));
      r.M.at_index(i) = Sym2{a * a + c, a * b, b * b + c};
      r.w.at_index(i) = {2 * u(rng), 2 * u(rng)};
    }
    for (int k = 0; k < 60; ++k)
      for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) r.P(x, y, k) = 0.05 + std::abs(u(rng));
    return r;
  }
  Point point() { return {static_cast<int>(rng() % 8), static_cast<int>(rng() % 8)}; }
  Vec2 vec() { return {3 * u(rng), 3 * u(rng)}; }
};

}  // namespace

TEST(MetricEval, AsymmetricExample) {
  const GridGeometry g(1, 1);
  for (double c : {0.5, 2.0, 3.0}) {
    const MetricField m = MetricField::asym_quadratic(SymTensorField2(g, Sym2::identity()), VectorField2(g, Vec2{c, 0}));
    EXPECT_DOUBLE_EQ(m.eval({0, 0}, {1, 0}), std::sqrt(1 + c * c));
    EXPECT_DOUBLE_EQ(m.eval({0, 0}, {-1, 0}), 1.0);
  }
}

TEST(MetricEval, ZeroOmegaIsRiemannian) {
  RandomMetrics r;
  const MetricField aq0 = MetricField::asym_quadratic(r.riem.tensor(), VectorField2(r.g, Vec2{}));
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const Vec2 v = r.vec();
    EXPECT_EQ(aq0.eval(x, v), r.riem.eval(x, v));
  }
}

TEST(MetricEval, CurvatureZeroNu) {
  RandomMetrics r;
  for (int k = 0; k < 60; ++k) {
    const Vec2 n = direction(2 * std::numbers::pi * k / 60);
    for (double len : {0.5, 1.0, 2.5}) {
      EXPECT_NEAR(r.rsf.eval({3, 4}, k, len * n, 0.0), r.rsf.potential()(3, 4, k) * len, 1e-12);
      EXPECT_NEAR(r.ela.eval({3, 4}, k, len * n, 0.0), r.ela.potential()(3, 4, k) * len, 1e-12);
    }
    EXPECT_EQ(r.rsf.eval({3, 4}, k, -n, 0.0), kInfinity);
    EXPECT_EQ(r.rsf.eval({3, 4}, k, perp(n), 0.0), kInfinity);
  }
}

TEST(MetricProperties, OneHomogeneity) {
  RandomMetrics r;
  std::uniform_real_distribution<double> s01(0.01, 10.0);
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const Vec2 v = r.vec();
    const double s = s01(r.rng);
    for (const MetricField* m : {&r.iso, &r.riem, &r.aq}) {
      const double a = m->eval(x, s * v), b = s * m->eval(x, v);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, b));
    }
    const int k = static_cast<int>(r.rng() % 60);
    const Vec2 n = direction(2 * std::numbers::pi * k / 60);
    const double len = 0.1 + std::abs(r.u(r.rng)), nu = r.u(r.rng);
    for (const MetricField* m : {&r.rsf, &r.ela}) {
      const double a = m->eval(x, k, s * len * n, s * nu), b = s * m->eval(x, k, len * n, nu);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, b));
    }
  }
}

TEST(MetricProperties, Convexity) {
  RandomMetrics r;
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const Vec2 a = r.vec(), b = r.vec();
    for (const MetricField* m : {&r.iso, &r.riem, &r.aq})
      EXPECT_LE(m->eval(x, a + b), m->eval(x, a) + m->eval(x, b) + 1e-12);
  }
}

TEST(MetricProperties, AsymmetricLowerBound) {
  RandomMetrics r;
  int equal_cases = 0;
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const Vec2 v = r.vec();
    const double fa = r.aq.eval(x, v), fr = r.riem.eval(x, v);
    EXPECT_GE(fa, fr);
    if (dot(r.aq.omega()[x], v) <= 0.0) {
      EXPECT_EQ(fa, fr);
      ++equal_cases;
    } else {
      EXPECT_GT(fa, fr);
    }
  }
  EXPECT_GT(equal_cases, kSamples / 4);
}

TEST(MetricProperties, AsymmetryRatioFromLambda) {
  // omega built from a gradient, as in the pipeline
  const GridGeometry g(1, 1);
  for (double lambda : {2.0, -2.0, 0.7}) {
    const VectorField2 om = asym_vector(VectorField2(g, Vec2{0.3, 0.0}), lambda);
    const MetricField m = MetricField::asym_quadratic(SymTensorField2(g, Sym2::identity()), om);
    const Vec2 t{0.0, lambda > 0 ? 1.0 : -1.0};
    EXPECT_DOUBLE_EQ(m.eval({0, 0}, t), std::sqrt(1 + lambda * lambda));
    EXPECT_DOUBLE_EQ(m.eval({0, 0}, -t), 1.0);
  }
}

TEST(MetricProperties, CurvatureMonotone) {
  RandomMetrics r;
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const int k = static_cast<int>(r.rng() % 60);
    const Vec2 u = (0.1 + std::abs(r.u(r.rng))) * direction(2 * std::numbers::pi * k / 60);
    const double n1 = std::abs(r.u(r.rng)), n2 = n1 + std::abs(r.u(r.rng));
    const double sgn = r.u(r.rng) < 0 ? -1.0 : 1.0;
    for (const MetricField* m : {&r.rsf, &r.ela}) EXPECT_LE(m->eval(x, k, u, n1), m->eval(x, k, u, sgn * n2));
    const double b1 = 1 + 200 * std::abs(r.u(r.rng)), b2 = b1 + 200 * std::abs(r.u(r.rng));
    for (auto model : {CurvatureModel::ReedsSheppForward, CurvatureModel::Elastica}) {
      const MetricField lo = MetricField::curvature(r.rsf.potential(), b1, model);
      const MetricField hi = MetricField::curvature(r.rsf.potential(), b2, model);
      EXPECT_LE(lo.eval(x, k, u, n1), hi.eval(x, k, u, n1));
    }
  }
}

TEST(MetricProperties, RotationInPlace) {
  RandomMetrics r;
  EXPECT_NEAR(r.rsf.eval({1, 1}, 5, {0, 0}, 0.2), r.rsf.potential()(1, 1, 5) * std::sqrt(100.0) * 0.2, 1e-12);
  EXPECT_EQ(r.ela.eval({1, 1}, 5, {0, 0}, 0.2), kInfinity);
  EXPECT_EQ(r.ela.eval({1, 1}, 5, {0, 0}, 0.0), 0.0);
}

TEST(Diagnostics, Examples) {
  const GridGeometry g(1, 1);
  const auto e = diagnose(MetricField::riemannian(SymTensorField2(g, Sym2::identity())), {0, 0});
  EXPECT_NEAR(e.symmetry_ratio, 1.0, 1e-12);
  EXPECT_NEAR(e.anisotropy_ratio, 1.0, 1e-12);
  const auto a = diagnose(MetricField::riemannian(SymTensorField2(g, Sym2{std::exp(-7.0), 0.0, 1.0})), {0, 0});
  EXPECT_NEAR(a.anisotropy_ratio, std::exp(3.5), 1e-9);
  EXPECT_NEAR(a.symmetry_ratio, 1.0, 1e-12);
  const auto q = diagnose(
      MetricField::asym_quadratic(SymTensorField2(g, Sym2::identity()), VectorField2(g, Vec2{2.0, 0.0})), {0, 0});
  EXPECT_NEAR(q.symmetry_ratio, std::sqrt(5.0), 1e-9);
}

TEST(VcgeoMetric, BalloonWeight) {
  const GridGeometry g(20, 20);
  const Point z{5, 5};
  const MetricField m = vcgeo_metric(SymTensorField2(g, Sym2::identity()), z);
  EXPECT_DOUBLE_EQ(m.eval({9, 5}, {1, 0}), 0.25);
  EXPECT_DOUBLE_EQ(m.eval({5, 9}, {0, -3}), 0.75);
  EXPECT_DOUBLE_EQ(m.weight_at(z), 1.0);
  for (int t = 2; t < 14; ++t) EXPECT_LT(m.weight_at({5 + t, 5 + t}), m.weight_at({5 + t - 1, 5 + t - 1}));
}

TEST(ComposeQz, WeightIdentities) {
  RandomMetrics r;
  const MetricField one = compose_qz(r.aq, ScalarField(r.g, 1.0));
  const MetricField two = compose_qz(r.aq, ScalarField(r.g, 2.0));
  ScalarField psi(r.g);
  for (double& v : psi.values()) v = 0.01 + std::abs(r.u(r.rng)) * 5;
  const MetricField any = compose_qz(r.aq, psi);
  for (int i = 0; i < kSamples; ++i) {
    const Point x = r.point();
    const Vec2 v = r.vec();
    EXPECT_EQ(one.eval(x, v), r.aq.eval(x, v));
    EXPECT_EQ(two.eval(x, v), 2.0 * r.aq.eval(x, v));
    EXPECT_NEAR(any.eval(x, v), psi[x] * r.aq.eval(x, v), 1e-14 * std::max(1.0, any.eval(x, v)));
  }
  EXPECT_THROW(compose_qz(r.aq, ScalarField(r.g, 0.0)), ParameterError);
}

TEST(MetricField, RejectsInvalidInput) {
  const GridGeometry g(2, 2);
  EXPECT_THROW(MetricField::isotropic(ScalarField(g, 0.0)), ParameterError);
  EXPECT_THROW(MetricField::riemannian(SymTensorField2(g, Sym2{1.0, 2.0, 1.0})), ParameterError);
  LiftedScalarField P(OrientedGridGeometry(g, 8), 1.0);
  EXPECT_THROW(MetricField::curvature(P, 0.0, CurvatureModel::Elastica), ParameterError);
}
