#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoseg/dualcut.hpp"
#include "geoseg/io.hpp"

namespace geoseg {

inline nlohmann::json point_json(Vec2 p) { return nlohmann::json::array({p.x, p.y}); }
inline nlohmann::json point_json(Point p) { return nlohmann::json::array({p.x, p.y}); }

inline nlohmann::json result_summary(const SegmentationResult& r) {
  return {{"contour", contour_to_json(r.contour)},
          {"z", point_json(r.z)},
          {"q", point_json(r.q)},
          {"a", point_json(r.a)},
          {"b", point_json(r.b)},
          {"u1", r.u1},
          {"u2", r.u2},
          {"region_pixels", count(r.region)},
          {"A_pixels", count(r.A)},
          {"stage_ms", r.stage_ms}};
}

struct FieldBlob {
  std::string content_type;
  std::string body;
};

inline const std::vector<std::string>& field_names() {
  static const std::vector<std::string> names{"contour.json", "region.pgm", "theta_z.pgm", "psi.f32", "psi.pgm",
                                              "gq.json",      "gamma_ab.json", "g_ba.json", "a_b.json", "A.pgm"};
  return names;
}

inline std::optional<FieldBlob> export_field(const SegmentationResult& r, const std::string& name) {
  auto bin = [](const std::vector<unsigned char>& b, const char* type) {
    return FieldBlob{type, std::string(b.begin(), b.end())};
  };
  auto js = [](const nlohmann::json& j) { return FieldBlob{"application/json", j.dump()}; };
  if (name == "contour.json") return js(contour_to_json(r.contour));
  if (name == "region.pgm") return bin(encode_mask(r.region), "image/x-portable-graymap");
  if (name == "theta_z.pgm") return bin(encode_mask(r.theta_z), "image/x-portable-graymap");
  if (name == "A.pgm") return bin(encode_mask(r.A), "image/x-portable-graymap");
  if (name == "psi.f32") return bin(encode_float_grid(r.psi), "application/octet-stream");
  if (name == "psi.pgm") return bin(encode_heatmap(r.psi), "image/x-portable-graymap");
  if (name == "gq.json") return js(contour_to_json(r.gq));
  if (name == "gamma_ab.json") return js(contour_to_json(r.gamma_ab));
  if (name == "g_ba.json") return js(contour_to_json(r.g_ba));
  if (name == "a_b.json")
    return js({{"a", point_json(r.a)}, {"b", point_json(r.b)}, {"q", point_json(r.q)}, {"z", point_json(r.z)},
               {"u1", r.u1}, {"u2", r.u2}});
  return std::nullopt;
}

}  // namespace geoseg
