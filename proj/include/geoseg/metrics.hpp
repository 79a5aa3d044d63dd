#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"

namespace geoseg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class MetricKind { Isotropic, Riemannian, AsymQuadratic, Curvature };

// Exponent of the curvature factor: 1/2 for Reeds-Shepp forward, 1 for elastica.
enum class CurvatureModel { ReedsSheppForward, Elastica };

inline double curvature_exponent(CurvatureModel m) { return m == CurvatureModel::Elastica ? 1.0 : 0.5; }

inline std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Isotropic: return "isotropic";
    case MetricKind::Riemannian: return "riemannian";
    case MetricKind::AsymQuadratic: return "asym_quadratic";
    case MetricKind::Curvature: return "curvature";
  }
  return "unknown";
}

// Angular tolerance for "u is parallel to n(theta)" in the lifted metric.
inline constexpr double kAlignTolerance = 1e-9;

class MetricField {
 public:
  static MetricField isotropic(ScalarField speed) {
    for (double v : speed.values())
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("isotropic speed must be positive and finite");
    MetricField m(MetricKind::Isotropic, speed.geometry());
    m.speed_ = std::move(speed);
    return m;
  }

  static MetricField riemannian(SymTensorField2 M) {
    check_tensors(M);
    MetricField m(MetricKind::Riemannian, M.geometry());
    m.M_ = std::move(M);
    return m;
  }

  static MetricField asym_quadratic(SymTensorField2 M, VectorField2 omega) {
    check_tensors(M);
    if (!M.geometry().same_shape(omega.geometry())) throw ParameterError("tensor/vector grid mismatch");
    MetricField m(MetricKind::AsymQuadratic, M.geometry());
    m.M_ = std::move(M);
    m.omega_ = std::move(omega);
    return m;
  }

  static MetricField curvature(LiftedScalarField P, double beta, CurvatureModel model) {
    if (!(beta > 0.0)) throw ParameterError("curvature weight beta must be positive");
    for (double v : P.values())
      if (!(v > 0.0)) throw ParameterError("orientation potential must be positive");
    MetricField m(MetricKind::Curvature, P.geometry().base);
    m.P_ = std::move(P);
    m.beta_ = beta;
    m.model_ = model;
    return m;
  }

  MetricKind kind() const { return kind_; }
  bool lifted() const { return kind_ == MetricKind::Curvature; }
  const GridGeometry& geometry() const { return geom_; }
  int n_theta() const { return lifted() ? P_.geometry().n_theta : 0; }
  double beta() const { return beta_; }
  CurvatureModel model() const { return model_; }
  const ScalarField& speed() const { return speed_; }
  const SymTensorField2& tensor() const { return M_; }
  const VectorField2& omega() const { return omega_; }
  const LiftedScalarField& potential() const { return P_; }
  const std::optional<ScalarField>& weight() const { return weight_; }

  double weight_at(Point x) const { return weight_ ? (*weight_)[x] : 1.0; }

  // Multiplies the weight field into the metric.
  MetricField with_weight(const ScalarField& w) const {
    if (!w.geometry().same_shape(geom_)) throw ParameterError("weight grid mismatch");
    for (double v : w.values())
      if (!(v > 0.0)) throw ParameterError("metric weight must be positive");
    MetricField out = *this;
    if (!out.weight_) {
      out.weight_ = w;
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) out.weight_->at_index(i) *= w.at_index(i);
    }
    return out;
  }

  // Unweighted spatial cost.
  double base_cost(Point x, Vec2 u) const {
    switch (kind_) {
      case MetricKind::Isotropic:
        return speed_[x] * norm(u);
      case MetricKind::Riemannian:
        return std::sqrt(std::max(0.0, M_[x].quad(u)));
      case MetricKind::AsymQuadratic: {
        const double p = std::max(0.0, dot(omega_[x], u));
        return std::sqrt(std::max(0.0, M_[x].quad(u)) + p * p);
      }
      case MetricKind::Curvature:
        break;
    }
    throw ParameterError("spatial evaluation of a lifted metric");
  }

  double eval(Point x, Vec2 u) const { return weight_at(x) * base_cost(x, u); }

  // Lifted cost of the tangent (u, nu) at (x, theta_k). u must point along
  // n(theta_k); any other spatial direction is inadmissible.
  double eval(Point x, int k, Vec2 u, double nu) const {
    if (!lifted()) throw ParameterError("lifted evaluation of a spatial metric");
    const double len = norm(u);
    const double p = P_(x.x, x.y, k);
    const double s = curvature_exponent(model_);
    if (len == 0.0) {
      if (nu == 0.0) return 0.0;
      // Limit of (1 + beta nu^2/|u|^2)^s |u| as |u| -> 0.
      return s == 0.5 ? weight_at(x) * p * std::sqrt(beta_) * std::abs(nu) : kInfinity;
    }
    const Vec2 n = direction(P_.geometry().theta(k));
    if (dot(u, n) <= 0.0 || std::abs(cross(n, u)) > kAlignTolerance * len) return kInfinity;
    return weight_at(x) * p * std::pow(1.0 + beta_ * nu * nu / (len * len), s) * len;
  }

 private:
  MetricField(MetricKind k, GridGeometry g) : kind_(k), geom_(g) {}

  static void check_tensors(const SymTensorField2& M) {
    for (const Sym2& m : M.values())
      if (!m.positive_definite()) throw ParameterError("metric tensor must be positive definite");
  }

  MetricKind kind_;
  GridGeometry geom_;
  ScalarField speed_;
  SymTensorField2 M_;
  VectorField2 omega_;
  LiftedScalarField P_;
  double beta_ = 0.0;
  CurvatureModel model_ = CurvatureModel::ReedsSheppForward;
  std::optional<ScalarField> weight_;
};

inline MetricField compose_qz(const MetricField& base, const ScalarField& psi) { return base.with_weight(psi); }

inline ScalarField balloon_weight(const GridGeometry& g, Point z) {
  ScalarField w(g);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) w(x, y) = 1.0 / std::max(std::hypot(x - z.x, y - z.y) * g.spacing, g.spacing);
  return w;
}

// Riemannian metric weighted by 1 / max(|x - z|, h).
inline MetricField vcgeo_metric(const SymTensorField2& M, Point z) {
  if (!M.geometry().contains(z)) throw ParameterError("landmark outside the grid");
  return MetricField::riemannian(M).with_weight(balloon_weight(M.geometry(), z));
}

struct MetricDiagnostics {
  double symmetry_ratio = 1.0;    // max_u F(u) / F(-u)
  double anisotropy_ratio = 1.0;  // max_u F(u) / min_u F(u)
};

inline MetricDiagnostics diagnose(const MetricField& m, Point x, int samples = 3600) {
  if (m.lifted()) throw ParameterError("diagnostics are defined for spatial metrics");
  MetricDiagnostics d{0.0, 0.0};
  double lo = kInfinity;
  double hi = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 u = direction(2.0 * std::numbers::pi * i / samples);
    const double f = m.eval(x, u);
    const double b = m.eval(x, -u);
    d.symmetry_ratio = std::max(d.symmetry_ratio, f / b);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  d.anisotropy_ratio = hi / lo;
  return d;
}

}  // namespace geoseg
