#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "geoseg/backtrack.hpp"
#include "geoseg/constraints.hpp"
#include "geoseg/eikonal.hpp"
#include "geoseg/error.hpp"
#include "geoseg/features.hpp"
#include "geoseg/image.hpp"
#include "geoseg/metrics.hpp"
#include "geoseg/path.hpp"
#include "geoseg/region.hpp"

namespace geoseg {

enum class MetricChoice { AsymQuadratic, Riemannian, ReedsSheppForward, Elastica };

inline bool is_curvature(MetricChoice m) {
  return m == MetricChoice::ReedsSheppForward || m == MetricChoice::Elastica;
}

inline std::string to_string(MetricChoice m) {
  switch (m) {
    case MetricChoice::AsymQuadratic: return "aq";
    case MetricChoice::Riemannian: return "riem";
    case MetricChoice::ReedsSheppForward: return "rsf";
    case MetricChoice::Elastica: return "elastica";
  }
  return "aq";
}

inline MetricChoice parse_metric_choice(const std::string& s) {
  if (s == "aq") return MetricChoice::AsymQuadratic;
  if (s == "riem") return MetricChoice::Riemannian;
  if (s == "rsf") return MetricChoice::ReedsSheppForward;
  if (s == "elastica") return MetricChoice::Elastica;
  throw ParameterError("unknown metric '" + s + "' (expected aq, riem, rsf or elastica)");
}

// alpha, alpha_p and lambda are magnitudes; the tensors use exp(-alpha g) and
// exp(-alpha_p <.,.>), and omega is scaled by lambda_sign * lambda.
struct DualCutConfig {
  MetricChoice metric = MetricChoice::AsymQuadratic;
  double alpha = 7.0;
  double alpha_tilde = 0.0;
  double alpha_p = 5.0;
  double lambda = 2.0;
  int lambda_sign = 1;
  double beta = 100.0;
  int n_theta = 60;
  double sigma = 2.0;
  RegionTermParams region;
  int stencil_radius = 2;

  void validate() const {
    if (!(alpha >= 0.0)) throw ParameterError("alpha is a magnitude and must be >= 0");
    if (!(alpha_p > 0.0)) throw ParameterError("alpha_p must be > 0");
    if (!(alpha_tilde >= -alpha)) throw ParameterError("alpha_tilde must be >= -alpha");
    if (!(lambda >= 0.0)) throw ParameterError("lambda is a magnitude and must be >= 0");
    if (lambda_sign != 1 && lambda_sign != -1) throw ParameterError("lambda_sign must be +1 or -1");
    if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
    if (n_theta < 4) throw ParameterError("ntheta must be >= 4");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be > 0");
    if (stencil_radius < 1 || stencil_radius > 3) throw ParameterError("stencil radius must be 1, 2 or 3");
    region.validate();
  }
};

// Landmark point, or a foreground scribble; barrier scribbles are optional.
struct SeedInput {
  std::optional<Point> point;
  std::vector<Vec2> scribble;
  std::vector<std::vector<Vec2>> barriers;
};

struct SegmentationResult {
  GeodesicPath contour;
  RegionMask region;
  Point z{};
  Point q{};
  Vec2 a{};
  Vec2 b{};
  double u1 = 0.0;
  double u2 = 0.0;
  GeodesicPath gq;
  GeodesicPath gamma_ab;
  GeodesicPath g_ba;
  RegionMask theta_z;
  RegionMask A;
  ScalarField psi;
  std::map<std::string, double> stage_ms;
};

// Stage tags are prefixed to error messages so callers can tell where it failed.
template <typename E>
[[noreturn]] inline void rethrow_tagged(const std::string& stage, const E& e) {
  throw E(stage + ": " + e.what());
}

// ---------------------------------------------------------------------------

// Leftmost crossing of the closed boundary polyline with {(x,0): x > 0}
// around z, snapped to the grid.
inline Point pick_q(const std::vector<Vec2>& boundary, Point z) {
  const std::size_t n = boundary.size();
  double best = kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = boundary[i] - z.vec();
    if (p.y == 0.0 && p.x > 0.0) best = std::min(best, p.x);
    if (n < 2) continue;
    const Vec2 r = boundary[(i + 1) % n] - z.vec();
    if ((p.y < 0.0 && r.y > 0.0) || (p.y > 0.0 && r.y < 0.0)) {
      const double x = p.x + (0.0 - p.y) * (r.x - p.x) / (r.y - p.y);
      if (x > 0.0) best = std::min(best, x);
    }
  }
  if (!std::isfinite(best))
    throw InitializationError("region boundary does not meet the positive half-axis; enlarge T or move z");
  return {z.x + static_cast<int>(std::lround(best)), z.y};
}

struct AxisCrossings {
  GeodesicPath path;  // input path with crossing points inserted as vertices
  std::vector<std::size_t> at;  // vertex indices of the crossings, in path order
};

// Transversal crossings of {(x,0): x < 0} around z. A run of vertices lying on
// the axis counts once, at its last vertex, when the path changes side across it.
inline AxisCrossings negative_axis_crossings(const GeodesicPath& in, Point z) {
  AxisCrossings out;
  const auto& v = in.vertices;
  auto rel = [&](std::size_t i) { return v[i] - z.vec(); };
  auto sgn = [](double y) { return y > 0.0 ? 1 : (y < 0.0 ? -1 : 0); };
  auto push = [&](Vec2 p, double th) {
    out.path.vertices.push_back(p);
    if (in.lifted()) out.path.thetas.push_back(th);
  };
  int last_side = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 p = rel(i);
    const int s = sgn(p.y);
    const double th = in.lifted() ? in.thetas[i] : 0.0;
    if (i > 0) {
      const Vec2 q = rel(i - 1);
      const int sq = sgn(q.y);
      if (sq != 0 && s != 0 && sq != s) {
        const double x = q.x + (0.0 - q.y) * (p.x - q.x) / (p.y - q.y);
        if (x < 0.0) {
          push({x + z.x, static_cast<double>(z.y)}, in.lifted() ? in.thetas[i - 1] : 0.0);
          out.at.push_back(out.path.vertices.size() - 1);
        }
      }
    }
    push(v[i], th);
    if (s != 0) {
      last_side = s;
      continue;
    }
    // On the axis: is this the last vertex of the run?
    std::size_t j = i + 1;
    if (j < v.size() && sgn(rel(j).y) == 0) continue;
    const int next_side = j < v.size() ? sgn(rel(j).y) : 0;
    if (p.x < 0.0 && last_side != 0 && next_side != 0 && next_side != last_side)
      out.at.push_back(out.path.vertices.size() - 1);
  }
  out.path.closed = false;
  out.path.reparameterize();
  return out;
}

inline GeodesicPath sub_path(const GeodesicPath& p, std::size_t from, std::size_t to) {
  GeodesicPath s;
  s.vertices.assign(p.vertices.begin() + from, p.vertices.begin() + to + 1);
  if (p.lifted()) s.thetas.assign(p.thetas.begin() + from, p.thetas.begin() + to + 1);
  s.reparameterize();
  return s;
}

// Strict interior of the polygon formed by gamma and the axis segment from its
// end back to its start; empty when the endpoints coincide.
inline RegionMask region_A(const GeodesicPath& gamma_ab, const GridGeometry& g) {
  if (gamma_ab.vertices.size() < 3 || norm(gamma_ab.front() - gamma_ab.back()) < 1e-12) return RegionMask(g, 0);
  return fill_polygon(gamma_ab.vertices, g);
}

// Joins two paths end to start; the first occupies [0, 1/2], the second [1/2, 1].
inline GeodesicPath concatenate(const GeodesicPath& first, const GeodesicPath& second, double tol = 1.0) {
  if (norm(first.back() - second.front()) > tol || norm(second.back() - first.front()) > tol)
    throw NumericalError("concatenated paths do not share their endpoints");
  const bool lifted = first.lifted() && second.lifted();
  GeodesicPath c;
  c.closed = true;
  auto append = [&](const GeodesicPath& p, std::size_t from, double u0) {
    const double len = p.euclidean_length();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i > 0) acc += norm(p.vertices[i] - p.vertices[i - 1]);
      if (i < from) continue;
      c.vertices.push_back(p.vertices[i]);
      if (lifted) c.thetas.push_back(p.thetas[i]);
      c.params.push_back(u0 + 0.5 * (len > 0.0 ? acc / len : static_cast<double>(i) / std::max<std::size_t>(1, p.size() - 1)));
    }
  };
  append(first, 0, 0.0);
  const bool same = norm(first.back() - second.front()) < 1e-12;
  append(second, same ? 1 : 0, 0.5);
  c.params.back() = 1.0;
  return c;
}

// Orientation sample minimising P(p, .) over the open interval (lo, lo + pi);
// ties go to the sample nearest the interval midpoint.
inline int lift_endpoint(const LiftedScalarField& P, Point p, bool upper) {
  const auto& og = P.geometry();
  const double mid = upper ? std::numbers::pi / 2 : 3 * std::numbers::pi / 2;
  int best = -1;
  double bv = kInfinity, bd = kInfinity;
  for (int k = 0; k < og.n_theta; ++k) {
    const double th = og.theta(k);
    const bool in = upper ? (th > 0.0 && th < std::numbers::pi) : (th > std::numbers::pi && th < 2 * std::numbers::pi);
    if (!in) continue;
    const double v = P(p.x, p.y, k);
    const double dist = std::abs(th - mid);
    if (v < bv || (v == bv && dist < bd)) {
      best = k;
      bv = v;
      bd = dist;
    }
  }
  return best;
}

inline RegionMask rasterize_barriers(const std::vector<std::vector<Vec2>>& lines, const GridGeometry& g) {
  RegionMask m(g, 0);
  for (const auto& l : lines) draw_polyline(m, l, false);
  return m;
}

inline RegionMask contour_interior(const GeodesicPath& c, const GridGeometry& g) {
  RegionMask m = fill_polygon(c.vertices, g);
  draw_polyline(m, c.vertices, true);
  return m;
}

// Features and metric construction shared by the pipeline and the service.
struct FeatureCache {
  double sigma = 0.0;
  EdgeFeatures edges;
};

inline MetricField base_metric(const FeatureCache& f, const DualCutConfig& cfg) {
  switch (cfg.metric) {
    case MetricChoice::Riemannian:
      return MetricField::riemannian(edge_tangent_tensor(f.edges.W, f.edges.g, -cfg.alpha, cfg.alpha_tilde));
    case MetricChoice::AsymQuadratic:
      return MetricField::asym_quadratic(edge_tangent_tensor(f.edges.W, f.edges.g, -cfg.alpha, cfg.alpha_tilde),
                                         asym_vector(f.edges.varpi, cfg.lambda_sign * cfg.lambda));
    case MetricChoice::ReedsSheppForward:
    case MetricChoice::Elastica:
      return MetricField::curvature(orientation_potential(f.edges.W_normalized, -cfg.alpha_p, cfg.n_theta), cfg.beta,
                                    cfg.metric == MetricChoice::Elastica ? CurvatureModel::Elastica
                                                                         : CurvatureModel::ReedsSheppForward);
  }
  throw ParameterError("unknown metric");
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline std::vector<Point> stop_points(Point c, bool below, const GridGeometry& g, const RegionMask& blocked) {
  std::vector<Point> s;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const bool side = below ? dy < 0 : dy > 0;
      const Point p{c.x + dx, c.y + dy};
      if (side && g.contains(p) && !(blocked.size() && blocked[p])) s.push_back(p);
    }
  return s;
}

// Solve from `source` under the given cut and backtrack from the stop point.
inline GeodesicPath constrained_geodesic(const MetricField& metric, Point source, std::optional<int> source_k,
                                         ConstraintSet cs, const SolverOptions& opts) {
  if (metric.lifted()) {
    const DistanceMap d = solve_lifted(metric, {{source, *source_k}}, cs, opts);
    if (!d.stop_node) throw TopologyError("the front never reached the stopping set");
    return backtrack_lifted(d, *d.stop_node);
  }
  const DistanceMap d = solve(metric, {source}, cs, opts);
  if (!d.stop_node) throw TopologyError("the front never reached the stopping set");
  return backtrack(d, metric, cs, d.point(*d.stop_node), opts);
}

inline void append_vertex(GeodesicPath& p, Vec2 v, double theta) {
  p.vertices.push_back(v);
  if (p.lifted()) p.thetas.push_back(theta);
}

}  // namespace detail

inline Point landmark_from_scribble(const std::vector<Vec2>& scribble) {
  if (scribble.empty()) throw ParameterError("empty foreground scribble");
  Vec2 c{};
  for (Vec2 v : scribble) c += v;
  c = (1.0 / scribble.size()) * c;
  const auto it = std::min_element(scribble.begin(), scribble.end(),
                                   [&](Vec2 a, Vec2 b) { return norm(a - c) < norm(b - c); });
  return round_point(*it);
}

// Steps I and II plus concatenation on a prepared metric.
inline void dual_cut(SegmentationResult& r, const MetricField& qz, const std::optional<LiftedScalarField>& P,
                     const RegionMask& barriers, const SolverOptions& opts) {
  const GridGeometry& g = qz.geometry();
  const Point z = r.z;
  auto t0 = detail::Clock::now();

  // Step I: closed loop from q through the positive cut.
  ConstraintSet c1;
  c1.cut = Cut::PositiveRay;
  c1.z = z;
  c1.barriers = barriers;
  c1.stop_set = detail::stop_points(r.q, true, g, barriers);
  std::optional<int> kq, kb;
  if (P) kq = lift_endpoint(*P, r.q, true);
  try {
    r.gq = detail::constrained_geodesic(qz, r.q, kq, c1, opts);
  } catch (const TopologyError& e) {
    rethrow_tagged("step1", e);
  }
  detail::append_vertex(r.gq, r.q.vec(), P ? OrientedGridGeometry(g, P->geometry().n_theta).theta(*kq) : 0.0);
  r.gq.closed = true;
  r.gq.reparameterize();
  r.stage_ms["step1"] = detail::ms_since(t0);

  // Step II endpoints on the negative half-axis.
  t0 = detail::Clock::now();
  AxisCrossings xs = negative_axis_crossings(r.gq, z);
  if (xs.at.empty()) throw TopologyError("step2: closed geodesic never crosses the negative half-axis");
  const std::size_t ia = xs.at.front();
  const std::size_t ib = xs.at.back();
  r.a = xs.path.vertices[ia];
  r.b = xs.path.vertices[ib];
  r.u1 = xs.path.params[ia];
  r.u2 = xs.path.params[ib];
  r.gamma_ab = sub_path(xs.path, ia, ib);
  r.A = ia == ib ? RegionMask(g, 0) : region_A(r.gamma_ab, g);

  const Point pa = round_point(r.a);
  const Point pb = round_point(r.b);
  ConstraintSet c2;
  c2.cut = Cut::NegativeRay;
  c2.z = z;
  c2.barriers = barriers;
  c2.obstacle = r.A;
  c2.obstacle[pb] = 0;
  RegionMask blocked = r.A;
  for (std::size_t i = 0; i < blocked.size(); ++i)
    if (barriers.size() && barriers.at_index(i)) blocked.at_index(i) = 1;
  c2.stop_set = detail::stop_points(pa, false, g, blocked);
  if (P) kb = lift_endpoint(*P, pb, false);
  try {
    r.g_ba = detail::constrained_geodesic(qz, pb, kb, c2, opts);
  } catch (const TopologyError& e) {
    rethrow_tagged("step2", e);
  }
  detail::append_vertex(r.g_ba, r.a, P ? OrientedGridGeometry(g, P->geometry().n_theta).theta(lift_endpoint(*P, pa, false)) : 0.0);
  r.g_ba.reparameterize();
  r.stage_ms["step2"] = detail::ms_since(t0);

  if (ia == ib) {
    r.contour = r.g_ba;
    r.contour.closed = true;
    r.contour.vertices.front() = r.b;
    r.contour.reparameterize();
  } else {
    r.contour = concatenate(r.gamma_ab, r.g_ba);
  }
  r.region = contour_interior(r.contour, g);
}

inline SegmentationResult segment(const Image& img, const SeedInput& seed, const DualCutConfig& cfg,
                                  const FeatureCache* cache = nullptr) {
  cfg.validate();
  SegmentationResult r;
  const GridGeometry g = img.geometry();
  auto t0 = detail::Clock::now();

  std::vector<Point> seeds;
  if (!seed.scribble.empty()) {
    r.z = landmark_from_scribble(seed.scribble);
    RegionMask sm(g, 0);
    draw_polyline(sm, seed.scribble, false);
    for (std::size_t i = 0; i < sm.size(); ++i)
      if (sm.at_index(i)) seeds.push_back(g.point(i));
  } else if (seed.point) {
    r.z = *seed.point;
    seeds.push_back(r.z);
  } else {
    throw ParameterError("a landmark point or foreground scribble is required");
  }
  if (!g.contains(r.z)) throw ParameterError("landmark outside the image");
  const RegionMask barriers = rasterize_barriers(seed.barriers, g);
  for (Point s : seeds)
    if (barriers[s]) throw ParameterError("barrier scribble overlaps the landmark or foreground scribble");
  const SolverOptions opts{cfg.stencil_radius};

  FeatureCache local;
  if (!cache || cache->sigma != cfg.sigma) {
    local.sigma = cfg.sigma;
    local.edges = compute_edge_features(img, cfg.sigma);
    cache = &local;
  }
  r.stage_ms["features"] = detail::ms_since(t0);

  t0 = detail::Clock::now();
  HomogeneityField h;
  try {
    h = compute_homogeneity(img, cache->edges.g, seeds, r.z, cfg.region, barriers, opts);
  } catch (const DegenerateRegionError& e) {
    rethrow_tagged("region", e);
  }
  r.theta_z = h.theta_z;
  r.psi = h.psi;
  r.stage_ms["region"] = detail::ms_since(t0);

  t0 = detail::Clock::now();
  const MetricField qz = compose_qz(base_metric(*cache, cfg), h.psi);
  std::optional<LiftedScalarField> P;
  if (qz.lifted()) P = qz.potential();
  r.stage_ms["metric"] = detail::ms_since(t0);

  try {
    r.q = pick_q(h.boundary, r.z);
  } catch (const InitializationError& e) {
    rethrow_tagged("pick_q", e);
  }
  if (barriers[r.q]) throw InitializationError("pick_q: the cut point lies on a barrier scribble");
  dual_cut(r, qz, P, barriers, opts);
  return r;
}

// Baseline: two geodesics under the balloon-weighted Riemannian metric. With
// a != b the loop from b back to a (positive cut) is closed by the path from a
// to b (negative cut); with a == b the loop alone is returned.
inline SegmentationResult vcgeo_segment(const Image& img, Point z, Point a, Point b, const DualCutConfig& cfg,
                                        const std::vector<std::vector<Vec2>>& barrier_lines = {}) {
  cfg.validate();
  const GridGeometry g = img.geometry();
  if (!g.contains(z) || !g.contains(a) || !g.contains(b)) throw ParameterError("vcgeo points outside the image");
  const SolverOptions opts{cfg.stencil_radius};
  const EdgeFeatures f = compute_edge_features(img, cfg.sigma);
  const MetricField m = vcgeo_metric(edge_tangent_tensor(f.W, f.g, -cfg.alpha, cfg.alpha_tilde), z);
  const RegionMask barriers = rasterize_barriers(barrier_lines, g);
  SegmentationResult r;
  r.z = z;
  r.q = b;
  r.a = a.vec();
  r.b = b.vec();

  ConstraintSet c1;
  c1.cut = Cut::PositiveRay;
  c1.z = z;
  c1.barriers = barriers;
  c1.stop_set = detail::stop_points(a, true, g, barriers);
  r.gq = detail::constrained_geodesic(m, b, std::nullopt, c1, opts);
  r.gq.vertices.push_back(a.vec());
  r.gq.reparameterize();
  if (a == b) {
    r.contour = r.gq;
    r.contour.closed = true;
  } else {
    ConstraintSet c2;
    c2.cut = Cut::NegativeRay;
    c2.z = z;
    c2.barriers = barriers;
    c2.stop_set = {b};
    r.g_ba = detail::constrained_geodesic(m, a, std::nullopt, c2, opts);
    r.contour = concatenate(r.gq, r.g_ba);
  }
  r.region = contour_interior(r.contour, g);
  return r;
}

}  // namespace geoseg
