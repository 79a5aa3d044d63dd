#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/path.hpp"

namespace geoseg {

// Half-axes anchored at the landmark z: PositiveRay is {(x,0): x >= 0},
// NegativeRay {(x,0): x <= 0}, in z-centred coordinates.
enum class Cut { None, PositiveRay, NegativeRay };

struct ConstraintSet {
  Cut cut = Cut::None;
  Point z{};
  RegionMask obstacle;  // empty field means no obstacle
  RegionMask barriers;
  std::vector<Point> stop_set;
};

// Answers the pruning questions asked by the solvers and the backtracker.
class ConstraintChecker {
 public:
  ConstraintChecker(const GridGeometry& g, const ConstraintSet& c) : geom_(g), cut_(c.cut), z_(c.z), blocked_(g, 0) {
    auto merge = [&](const RegionMask& m, const char* what) {
      if (m.size() == 0) return;
      if (!m.geometry().same_shape(g)) throw ParameterError(std::string(what) + " mask does not match the grid");
      for (std::size_t i = 0; i < m.size(); ++i)
        if (m.at_index(i)) blocked_.at_index(i) = 1;
      any_blocked_ = true;
    };
    merge(c.obstacle, "obstacle");
    merge(c.barriers, "barrier");
    if (cut_ != Cut::None && !g.contains(z_)) throw ParameterError("cut anchor outside the grid");
  }

  const GridGeometry& geometry() const { return geom_; }
  Cut cut() const { return cut_; }
  Point z() const { return z_; }
  bool blocked(Point p) const { return blocked_[p] != 0; }
  const RegionMask& blocked_mask() const { return blocked_; }

  // 0 for the side that contains the ray itself, 1 for the other.
  int side(Vec2 p) const {
    const double y = p.y - z_.y;
    return cut_ == Cut::PositiveRay ? (y >= 0.0 ? 0 : 1) : (y <= 0.0 ? 0 : 1);
  }

  bool crosses_cut(Vec2 a, Vec2 b) const {
    if (cut_ == Cut::None) return false;
    if (side(a) == side(b)) return false;
    const double xa = a.x - z_.x, ya = a.y - z_.y;
    const double xb = b.x - z_.x, yb = b.y - z_.y;
    // Abscissa of the crossing with y = 0, times (yb - ya).
    const double num = xa * (yb - ya) - ya * (xb - xa);
    const double sgn = (yb - ya) > 0.0 ? num : -num;
    return cut_ == Cut::PositiveRay ? sgn >= 0.0 : sgn <= 0.0;
  }

  // Segment between lattice points, with its touched pixels given relative
  // to `origin`.
  bool lattice_segment_ok(Point a, Point b, Point origin, const std::vector<Point>& rel) const {
    if (crosses_cut(a.vec(), b.vec())) return false;
    if (!any_blocked_) return true;
    for (Point r : rel) {
      const Point p{origin.x + r.x, origin.y + r.y};
      if (!geom_.contains(p) || blocked_[p]) return false;
    }
    return true;
  }

  // Arbitrary segment inside the grid.
  bool segment_ok(Vec2 a, Vec2 b) const {
    if (crosses_cut(a, b)) return false;
    if (!any_blocked_) return true;
    for (Point p : segment_pixels(a, b))
      if (!geom_.contains(p) || blocked_[p]) return false;
    return true;
  }

  // A simplex with z as a vertex must not have vertices on both sides.
  bool simplex_ok_at_z(Point x, Point y1, Point y2) const {
    if (cut_ == Cut::None) return true;
    if (!(x == z_ || y1 == z_ || y2 == z_)) return true;
    const int s = side(x.vec());
    return side(y1.vec()) == s && side(y2.vec()) == s;
  }

 private:
  GridGeometry geom_;
  Cut cut_;
  Point z_;
  RegionMask blocked_;
  bool any_blocked_ = false;
};

}  // namespace geoseg
