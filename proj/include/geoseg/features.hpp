#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "geoseg/error.hpp"
#include "geoseg/gaussian.hpp"
#include "geoseg/image.hpp"

namespace geoseg {

// Per-pixel 2 x m matrix of smoothed derivatives. Row 0 holds d/dx of every
// channel, row 1 d/dy.
class JacobianField {
 public:
  JacobianField() = default;
  JacobianField(GridGeometry g, int channels)
      : geom_(g), channels_(channels), dx_(g.size() * channels, 0.0), dy_(g.size() * channels, 0.0) {}

  const GridGeometry& geometry() const { return geom_; }
  int channels() const { return channels_; }
  int width() const { return geom_.width; }
  int height() const { return geom_.height; }

  double& dx(int x, int y, int c) { return dx_[slot(x, y, c)]; }
  double& dy(int x, int y, int c) { return dy_[slot(x, y, c)]; }
  double dx(int x, int y, int c) const { return dx_[slot(x, y, c)]; }
  double dy(int x, int y, int c) const { return dy_[slot(x, y, c)]; }

  double frobenius(int x, int y) const {
    double s = 0.0;
    for (int c = 0; c < channels_; ++c) s += dx(x, y, c) * dx(x, y, c) + dy(x, y, c) * dy(x, y, c);
    return std::sqrt(s);
  }

  // J J^T, a 2x2 symmetric matrix.
  Sym2 outer(int x, int y) const {
    Sym2 s{0.0, 0.0, 0.0};
    for (int c = 0; c < channels_; ++c) {
      s.xx += dx(x, y, c) * dx(x, y, c);
      s.xy += dx(x, y, c) * dy(x, y, c);
      s.yy += dy(x, y, c) * dy(x, y, c);
    }
    return s;
  }

  void scale(double s) {
    for (double& v : dx_) v *= s;
    for (double& v : dy_) v *= s;
  }

 private:
  std::size_t slot(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * geom_.width + x) * channels_ + c;
  }
  GridGeometry geom_;
  int channels_ = 0;
  std::vector<double> dx_;
  std::vector<double> dy_;
};

// Central differences, one-sided on the border rows/columns.
inline void central_differences(const ScalarField& f, int x, int y, double& fx, double& fy) {
  const int w = f.width();
  const int h = f.height();
  if (w == 1) {
    fx = 0.0;
  } else if (x == 0) {
    fx = f(1, y) - f(0, y);
  } else if (x == w - 1) {
    fx = f(w - 1, y) - f(w - 2, y);
  } else {
    fx = 0.5 * (f(x + 1, y) - f(x - 1, y));
  }
  if (h == 1) {
    fy = 0.0;
  } else if (y == 0) {
    fy = f(x, 1) - f(x, 0);
  } else if (y == h - 1) {
    fy = f(x, h - 1) - f(x, h - 2);
  } else {
    fy = 0.5 * (f(x, y + 1) - f(x, y - 1));
  }
}

inline JacobianField jacobian(const Image& img, double sigma) {
  JacobianField J(img.geometry(), img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    const ScalarField s = gaussian_smooth(img.channel(c), sigma);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) central_differences(s, x, y, J.dx(x, y, c), J.dy(x, y, c));
  }
  return J;
}

inline double sup_frobenius(const JacobianField& J) {
  double m = 0.0;
  for (int y = 0; y < J.height(); ++y)
    for (int x = 0; x < J.width(); ++x) m = std::max(m, J.frobenius(x, y));
  return m;
}

// g = |J|_F / sup |J|_F, or 0 everywhere for a constant image.
inline ScalarField edge_magnitude(const JacobianField& J) {
  ScalarField g(J.geometry(), 0.0);
  const double sup = sup_frobenius(J);
  if (sup <= 0.0) return g;
  for (int y = 0; y < J.height(); ++y)
    for (int x = 0; x < J.width(); ++x) g(x, y) = J.frobenius(x, y) / sup;
  return g;
}

// Copy of J scaled so that sup |J|_F = 1 (unchanged when J vanishes).
inline JacobianField normalized_jacobian(const JacobianField& J) {
  JacobianField out = J;
  const double sup = sup_frobenius(J);
  if (sup > 0.0) out.scale(1.0 / sup);
  return out;
}

inline SymTensorField2 structure_tensor(const JacobianField& J) {
  SymTensorField2 W(J.geometry());
  for (int y = 0; y < J.height(); ++y)
    for (int x = 0; x < J.width(); ++x) W(x, y) = J.outer(x, y) + Sym2::identity();
  return W;
}

namespace detail {

inline Sym2 spectral_tensor(Vec2 theta, double g, double alpha, double alpha_tilde) {
  const Vec2 tp = perp(theta);
  return std::exp(alpha * g) * Sym2::outer(tp) + std::exp(alpha_tilde * g) * Sym2::outer(theta);
}

}  // namespace detail

// M = exp(alpha g) t' t'^T + exp(alpha_tilde g) t t^T, where t is the unit
// eigenvector of W for its smaller eigenvalue and t' its +pi/2 rotation.
inline SymTensorField2 anisotropy_tensor(const SymTensorField2& W, const ScalarField& g, double alpha,
                                         double alpha_tilde) {
  if (alpha_tilde < alpha) throw ParameterError("anisotropy_tensor requires alpha_tilde >= alpha");
  if (!W.geometry().same_shape(g.geometry())) throw ParameterError("tensor/magnitude grid mismatch");
  SymTensorField2 M(W.geometry());
  for (std::size_t i = 0; i < W.size(); ++i)
    M.at_index(i) = detail::spectral_tensor(W.at_index(i).min_eigenvector(), g.at_index(i), alpha, alpha_tilde);
  return M;
}

// Same construction with the roles of the two eigenvectors exchanged, so the
// damped direction exp(alpha g) is the edge tangent (the smaller-eigenvalue
// eigenvector of W) and motion along contours becomes cheap. This is the
// tensor the segmentation pipeline uses.
inline SymTensorField2 edge_tangent_tensor(const SymTensorField2& W, const ScalarField& g, double alpha,
                                           double alpha_tilde) {
  if (alpha_tilde < alpha) throw ParameterError("edge_tangent_tensor requires alpha_tilde >= alpha");
  if (!W.geometry().same_shape(g.geometry())) throw ParameterError("tensor/magnitude grid mismatch");
  SymTensorField2 M(W.geometry());
  for (std::size_t i = 0; i < W.size(); ++i) {
    // perp(-perp(t)) = t
    const Vec2 t = W.at_index(i).min_eigenvector();
    M.at_index(i) = detail::spectral_tensor(-perp(t), g.at_index(i), alpha, alpha_tilde);
  }
  return M;
}

// Channel mean of the smoothed gradients.
inline VectorField2 mean_gradient(const JacobianField& J) {
  VectorField2 v(J.geometry());
  for (int y = 0; y < J.height(); ++y) {
    for (int x = 0; x < J.width(); ++x) {
      Vec2 s{};
      for (int c = 0; c < J.channels(); ++c) s += Vec2{J.dx(x, y, c), J.dy(x, y, c)};
      v(x, y) = (1.0 / J.channels()) * s;
    }
  }
  return v;
}

inline VectorField2 asym_vector(const VectorField2& varpi, double lambda) {
  VectorField2 omega(varpi.geometry());
  for (std::size_t i = 0; i < varpi.size(); ++i) {
    const Vec2 v = varpi.at_index(i);
    const double n = norm(v);
    omega.at_index(i) = n > 0.0 ? (lambda / n) * perp(v) : Vec2{};
  }
  return omega;
}

inline VectorField2 asym_vector(const Image& img, double sigma, double lambda) {
  return asym_vector(mean_gradient(jacobian(img, sigma)), lambda);
}

// P(x, theta_k) = exp(alpha <n_k^perp, W(x) n_k^perp>) on the lifted grid.
inline LiftedScalarField orientation_potential(const SymTensorField2& W, double alpha, int n_theta) {
  if (!(alpha < 0.0)) throw ParameterError("orientation potential needs alpha < 0");
  const OrientedGridGeometry og(W.geometry(), n_theta);
  LiftedScalarField P(og);
  for (int k = 0; k < n_theta; ++k) {
    const Vec2 np = perp(direction(og.theta(k)));
    for (int y = 0; y < W.height(); ++y)
      for (int x = 0; x < W.width(); ++x) P(x, y, k) = std::exp(alpha * W(x, y).quad(np));
  }
  return P;
}

struct EdgeFeatures {
  JacobianField J;
  ScalarField g;
  SymTensorField2 W;
  // Structure tensor of the Jacobian rescaled to unit sup norm.
  SymTensorField2 W_normalized;
  VectorField2 varpi;
};

inline EdgeFeatures compute_edge_features(const Image& img, double sigma) {
  EdgeFeatures f;
  f.J = jacobian(img, sigma);
  f.g = edge_magnitude(f.J);
  f.W = structure_tensor(f.J);
  f.W_normalized = structure_tensor(normalized_jacobian(f.J));
  f.varpi = mean_gradient(f.J);
  return f;
}

}  // namespace geoseg
