#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoseg/dualcut.hpp"
#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/path.hpp"

namespace geoseg {

inline double jaccard(const RegionMask& s, const RegionMask& gt) {
  if (!s.geometry().same_shape(gt.geometry())) throw ParameterError("jaccard: mask shapes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool a = s.at_index(i) != 0;
    const bool b = gt.at_index(i) != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct Shape {
  enum class Kind { Disk, Ellipse, Polygon } kind = Kind::Disk;
  Vec2 center{};
  double rx = 0.0;
  double ry = 0.0;
  double angle = 0.0;  // ellipse rotation
  std::vector<Vec2> polygon;
  double intensity = 1.0;
  bool target = true;  // part of the ground truth

  static Shape disk(Vec2 c, double r, double intensity, bool target = true) {
    Shape s;
    s.center = c;
    s.rx = s.ry = r;
    s.intensity = intensity;
    s.target = target;
    return s;
  }
  static Shape ellipse(Vec2 c, double rx, double ry, double angle, double intensity, bool target = true) {
    Shape s = disk(c, rx, intensity, target);
    s.kind = Kind::Ellipse;
    s.ry = ry;
    s.angle = angle;
    return s;
  }
  static Shape poly(std::vector<Vec2> v, double intensity, bool target = true) {
    Shape s;
    s.kind = Kind::Polygon;
    s.polygon = std::move(v);
    s.intensity = intensity;
    s.target = target;
    return s;
  }

  bool contains(Vec2 p) const {
    switch (kind) {
      case Kind::Disk:
        return norm(p - center) <= rx;
      case Kind::Ellipse: {
        const Vec2 d = p - center;
        const double c = std::cos(angle), s = std::sin(angle);
        const double u = (c * d.x + s * d.y) / rx;
        const double v = (-s * d.x + c * d.y) / ry;
        return u * u + v * v <= 1.0;
      }
      case Kind::Polygon:
        return inside_even_odd(polygon, p);
    }
    return false;
  }
};

struct SynthSpec {
  int width = 128;
  int height = 128;
  double background = 0.2;
  std::vector<Shape> shapes;
  double noise_variance = 0.0;
  double salt_pepper = 0.0;
  std::uint64_t seed = 0;
};

struct SynthImage {
  Image image;
  RegionMask truth;
};

// Shapes are painted in order over the background; a pixel belongs to the
// ground truth when the last shape covering it is a target. Noise uses std::mt19937_64 seeded with spec.seed.
inline SynthImage synth_image(const SynthSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw ParameterError("synthetic image size must be positive");
  if (spec.background < 0.0 || spec.background > 1.0) throw ParameterError("background intensity outside [0,1]");
  if (spec.noise_variance < 0.0) throw ParameterError("noise variance must be >= 0");
  if (spec.salt_pepper < 0.0 || spec.salt_pepper > 1.0) throw ParameterError("salt-and-pepper rate outside [0,1]");
  for (const Shape& s : spec.shapes) {
    if (s.intensity < 0.0 || s.intensity > 1.0) throw ParameterError("shape intensity outside [0,1]");
    if (s.kind != Shape::Kind::Polygon && !(s.rx > 0.0 && s.ry > 0.0)) throw ParameterError("shape radius must be > 0");
    if (s.kind == Shape::Kind::Polygon && s.polygon.size() < 3) throw ParameterError("polygon needs 3 vertices");
  }
  Image img(spec.width, spec.height, 1, spec.background);
  RegionMask gt(img.geometry(), 0);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      for (const Shape& s : spec.shapes) {
        if (!s.contains(p)) continue;
        img.set(x, y, 0, s.intensity);
        gt(x, y) = s.target ? 1 : 0;
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  if (spec.noise_variance > 0.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(spec.noise_variance));
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) img.set(x, y, 0, img(x, y) + n(rng));
  }
  if (spec.salt_pepper > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const double r = u(rng);
        if (r < spec.salt_pepper) img.set(x, y, 0, r < 0.5 * spec.salt_pepper ? 0.0 : 1.0);
      }
  }
  return {std::move(img), std::move(gt)};
}

struct RunRecord {
  Point seed{};
  double jaccard = 0.0;
  double runtime_ms = 0.0;
  std::string error;  // empty on success
};

struct EvalReport {
  std::vector<RunRecord> runs;
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double std = 0.0;
  std::size_t failures = 0;

  // Aggregates over the successful runs; population standard deviation.
  void aggregate() {
    std::vector<double> v;
    failures = 0;
    for (const auto& r : runs) {
      if (r.error.empty())
        v.push_back(r.jaccard);
      else
        ++failures;
    }
    if (v.empty()) {
      mean = max = min = std = 0.0;
      return;
    }
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    max = *std::max_element(v.begin(), v.end());
    min = *std::min_element(v.begin(), v.end());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std = std::sqrt(ss / static_cast<double>(v.size()));
  }

  std::string csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "seed_x,seed_y,jaccard,runtime_ms\n";
    for (const auto& r : runs)
      os << r.seed.x << ',' << r.seed.y << ',' << (r.error.empty() ? r.jaccard : std::nan("")) << ',' << r.runtime_ms
         << '\n';
    return os.str();
  }

  nlohmann::json json() const {
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& r : runs)
      if (!r.error.empty()) errors.push_back({{"seed", {r.seed.x, r.seed.y}}, {"error", r.error}});
    return {{"runs", runs.size()}, {"failures", failures}, {"mean", mean}, {"max", max},
            {"min", min},          {"std", std},           {"errors", errors}};
  }
};

inline EvalReport batch_run(const Image& img, const RegionMask& gt, const std::vector<Point>& seeds,
                            const DualCutConfig& cfg) {
  FeatureCache cache;
  cache.sigma = cfg.sigma;
  cache.edges = compute_edge_features(img, cfg.sigma);
  EvalReport rep;
  for (Point s : seeds) {
    RunRecord rec;
    rec.seed = s;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SeedInput in;
      in.point = s;
      const auto res = segment(img, in, cfg, &cache);
      rec.jaccard = jaccard(res.region, gt);
    } catch (const Error& e) {
      rec.error = e.what();
    }
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.runs.push_back(std::move(rec));
  }
  rep.aggregate();
  return rep;
}

}  // namespace geoseg
