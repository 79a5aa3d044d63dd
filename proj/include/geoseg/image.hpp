#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoseg/error.hpp"

namespace geoseg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
// Counter-clockwise rotation by pi/2.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }
  static constexpr Sym2 outer(Vec2 v) { return {v.x * v.x, v.x * v.y, v.y * v.y}; }

  constexpr Vec2 apply(Vec2 u) const { return {xx * u.x + xy * u.y, xy * u.x + yy * u.y}; }
  constexpr double quad(Vec2 u) const { return u.x * (xx * u.x + xy * u.y) + u.y * (xy * u.x + yy * u.y); }
  constexpr double trace() const { return xx + yy; }
  constexpr double det() const { return xx * yy - xy * xy; }

  friend constexpr Sym2 operator+(Sym2 a, Sym2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend constexpr Sym2 operator*(double s, Sym2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
  friend constexpr bool operator==(Sym2, Sym2) = default;

  // Eigenvalues in ascending order.
  std::pair<double, double> eigenvalues() const {
    const double half_tr = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return {half_tr - r, half_tr + r};
  }

  // Unit eigenvector of the smaller eigenvalue; (1,0) when the matrix is a
  // multiple of the identity.
  Vec2 min_eigenvector() const {
    const double d = 0.5 * (xx - yy);
    const double r = std::hypot(d, xy);
    if (r <= 1e-15 * std::max(1.0, std::abs(xx) + std::abs(yy))) {
      return {1.0, 0.0};
    }
    // Angle of the major axis is 0.5*atan2(2xy, xx-yy); the minor axis is
    // perpendicular to it.
    const double major = 0.5 * std::atan2(xy, d);
    return {-std::sin(major), std::cos(major)};
  }

  bool positive_definite() const {
    auto [lo, hi] = eigenvalues();
    return lo > 0.0 && hi > 0.0 && std::isfinite(hi);
  }
};

// Integer pixel position: x is the column, y the row.
struct Point {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Point, Point) = default;
  constexpr Vec2 vec() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

inline Point round_point(Vec2 p) {
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
}

// Regular pixel grid. Pixel centres sit at integer coordinates; the origin is
// the landmark point z and relative coordinates are expressed w.r.t. it.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  Vec2 origin{};

  GridGeometry() = default;
  GridGeometry(int w, int h, double s = 1.0, Vec2 o = {}) : width(w), height(h), spacing(s), origin(o) {
    if (w <= 0 || h <= 0) throw ParameterError("grid dimensions must be positive");
    if (!(s > 0.0)) throw ParameterError("grid spacing must be positive");
    if (!inside(o)) throw ParameterError("grid origin must lie inside the grid");
  }

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  bool inside(Vec2 p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1; }
  std::size_t index(Point p) const {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(p.x);
  }
  Point point(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width)), static_cast<int>(i / static_cast<std::size_t>(width))};
  }
  Vec2 relative(Vec2 p) const { return p - origin; }
  GridGeometry with_origin(Vec2 o) const { return GridGeometry(width, height, spacing, o); }
  bool same_shape(const GridGeometry& o) const { return width == o.width && height == o.height; }
};

// Orientation-lifted grid Omega x S^1 with n_theta uniformly spaced angles.
struct OrientedGridGeometry {
  GridGeometry base;
  int n_theta = 0;

  OrientedGridGeometry() = default;
  OrientedGridGeometry(GridGeometry b, int n) : base(b), n_theta(n) {
    if (n < 4) throw ParameterError("orientation sample count must be >= 4");
  }

  double step() const { return 2.0 * std::numbers::pi / n_theta; }
  double theta(int k) const { return step() * wrap(k); }
  int wrap(int k) const {
    const int r = k % n_theta;
    return r < 0 ? r + n_theta : r;
  }
  std::size_t size() const { return base.size() * static_cast<std::size_t>(n_theta); }
};

// Per-pixel payload over a grid.
template <typename T>
class Field {
 public:
  Field() = default;
  explicit Field(GridGeometry g, T fill = T{}) : geom_(g), data_(g.size(), fill) {}
  Field(GridGeometry g, std::vector<T> data) : geom_(g), data_(std::move(data)) {
    if (data_.size() != geom_.size()) throw ParameterError("field data size does not match grid");
  }

  const GridGeometry& geometry() const { return geom_; }
  int width() const { return geom_.width; }
  int height() const { return geom_.height; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * geom_.width + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * geom_.width + x]; }
  T& operator[](Point p) { return (*this)(p.x, p.y); }
  const T& operator[](Point p) const { return (*this)(p.x, p.y); }
  T& at_index(std::size_t i) { return data_[i]; }
  const T& at_index(std::size_t i) const { return data_[i]; }

  // Value at the pixel nearest to a continuous position (clamped to the grid).
  const T& nearest(Vec2 p) const {
    const int x = std::clamp(static_cast<int>(std::lround(p.x)), 0, geom_.width - 1);
    const int y = std::clamp(static_cast<int>(std::lround(p.y)), 0, geom_.height - 1);
    return (*this)(x, y);
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

 private:
  GridGeometry geom_;
  std::vector<T> data_;
};

using ScalarField = Field<double>;
using VectorField2 = Field<Vec2>;
using SymTensorField2 = Field<Sym2>;
using RegionMask = Field<std::uint8_t>;

inline std::size_t count(const RegionMask& m) {
  return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(), [](std::uint8_t v) { return v != 0; }));
}

// Scalar field over the lifted grid, stored orientation-major.
class LiftedScalarField {
 public:
  LiftedScalarField() = default;
  LiftedScalarField(OrientedGridGeometry g, double fill = 0.0) : geom_(g), data_(g.size(), fill) {}

  const OrientedGridGeometry& geometry() const { return geom_; }
  double& operator()(int x, int y, int k) { return data_[index(x, y, k)]; }
  double operator()(int x, int y, int k) const { return data_[index(x, y, k)]; }
  std::span<const double> values() const { return data_; }

 private:
  std::size_t index(int x, int y, int k) const {
    return (static_cast<std::size_t>(geom_.wrap(k)) * geom_.base.height + y) * geom_.base.width + x;
  }
  OrientedGridGeometry geom_;
  std::vector<double> data_;
};

// Multi-channel raster with intensities in [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0) : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0) throw ParameterError("image dimensions must be positive");
    if (channels != 1 && channels != 3) throw ParameterError("image must have 1 or 3 channels");
    if (fill < 0.0 || fill > 1.0) throw ParameterError("image intensities must lie in [0,1]");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }
  Image(int width, int height, int channels, std::vector<double> data) : Image(width, height, channels) {
    if (data.size() != data_.size()) throw ParameterError("image data size mismatch");
    for (double v : data) {
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("image intensities must lie in [0,1]");
    }
    data_ = std::move(data);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  GridGeometry geometry() const { return GridGeometry(width_, height_); }

  double operator()(int x, int y, int c = 0) const { return data_[offset(x, y, c)]; }
  // Writes are clamped so the [0,1] invariant always holds.
  void set(int x, int y, int c, double v) { data_[offset(x, y, c)] = std::clamp(v, 0.0, 1.0); }

  std::span<const double> values() const { return data_; }

  ScalarField channel(int c) const {
    ScalarField f(geometry());
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) f(x, y) = (*this)(x, y, c);
    return f;
  }

  static Image from_channels(const std::vector<ScalarField>& chans) {
    if (chans.empty()) throw ParameterError("no channels");
    const auto& g = chans.front().geometry();
    Image img(g.width, g.height, static_cast<int>(chans.size()));
    for (int c = 0; c < img.channels(); ++c)
      for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) img.set(x, y, c, chans[c](x, y));
    return img;
  }

 private:
  std::size_t offset(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

}  // namespace geoseg
