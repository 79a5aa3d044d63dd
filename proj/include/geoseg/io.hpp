#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoseg/error.hpp"
#include "geoseg/image.hpp"
#include "geoseg/path.hpp"

namespace geoseg {

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed for " + path.string());
}

// Reads the whitespace/comment separated header tokens of a netpbm file.
class PnmHeader {
 public:
  explicit PnmHeader(const std::vector<unsigned char>& bytes) : b_(bytes) {}

  std::string token() {
    skip();
    std::string t;
    while (pos_ < b_.size() && !std::isspace(b_[pos_]) && b_[pos_] != '#') t.push_back(static_cast<char>(b_[pos_++]));
    if (t.empty()) throw FormatError("truncated PGM header");
    return t;
  }
  int integer() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw FormatError("bad PGM header field '" + t + "'");
    return std::stoi(t);
  }
  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= b_.size()) throw FormatError("truncated PGM header");
    return pos_ + 1;
  }

 private:
  void skip() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  const std::vector<unsigned char>& b_;
  std::size_t pos_ = 0;
};

inline Image decode_pgm(const std::vector<unsigned char>& bytes) {
  PnmHeader hdr(bytes);
  const std::string magic = hdr.token();
  if (magic != "P5") throw FormatError("only binary PGM (P5) is supported");
  const int w = hdr.integer();
  const int h = hdr.integer();
  const int maxval = hdr.integer();
  if (w <= 0 || h <= 0) throw FormatError("bad PGM dimensions");
  if (maxval <= 0 || maxval > 255) throw FormatError("unsupported PGM bit depth (maxval " + std::to_string(maxval) + ")");
  const std::size_t off = hdr.raster_offset();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < off + n) throw FormatError("truncated PGM raster");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::min(1.0, bytes[off + i] / 255.0);
  return Image(w, h, 1, std::move(data));
}

struct PngReadState {
  const std::vector<unsigned char>* bytes;
  std::size_t pos;
};

inline void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + n > st->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(out, st->bytes->data() + st->pos, n);
  st->pos += n;
}

inline Image decode_png(const std::vector<unsigned char>& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng init failed");
  }
  // Filled in before longjmp may happen; everything below is POD or owned here.
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  PngReadState st{&bytes, 8};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed or truncated PNG");
  }
  png_set_read_fn(png, &st, png_read_cb);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 8 && !(color == PNG_COLOR_TYPE_PALETTE) && !(color == PNG_COLOR_TYPE_GRAY && depth < 8)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG bit depth " + std::to_string(depth));
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int ch = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raster.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  if (ch != 1 && ch != 3) throw FormatError("unsupported PNG channel layout");
  std::vector<double> data(static_cast<std::size_t>(w) * h * ch);
  for (png_uint_32 y = 0; y < h; ++y)
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * ch; ++i) data[y * w * ch + i] = rows[y][i] / 255.0;
  return Image(static_cast<int>(w), static_cast<int>(h), ch, std::move(data));
}

}  // namespace detail

// Loads an 8-bit binary PGM or an 8-bit gray/RGB PNG; intensities are /255.
inline Image decode_image(const std::vector<unsigned char>& bytes) {
  static constexpr std::array<unsigned char, 8> kPngSig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) return detail::decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P') return detail::decode_pgm(bytes);
  throw FormatError("unrecognised image format");
}

inline Image load_image(const std::filesystem::path& path) {
  try {
    return decode_image(detail::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline std::vector<unsigned char> encode_pgm(int width, int height, const std::vector<unsigned char>& pixels) {
  const std::string hdr = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<unsigned char> out(hdr.begin(), hdr.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

inline void save_pgm(const Image& img, const std::filesystem::path& path) {
  if (img.channels() != 1) throw ParameterError("PGM output needs a single-channel image");
  std::vector<unsigned char> px(img.values().size());
  std::transform(img.values().begin(), img.values().end(), px.begin(),
                 [](double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); });
  const auto bytes = encode_pgm(img.width(), img.height(), px);
  detail::write_file(path, bytes.data(), bytes.size());
}

inline std::vector<unsigned char> encode_mask(const RegionMask& mask) {
  std::vector<unsigned char> px(mask.size());
  std::transform(mask.values().begin(), mask.values().end(), px.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  return encode_pgm(mask.width(), mask.height(), px);
}

// Mask as PGM with 0 / 255 bytes.
inline void save_mask(const RegionMask& mask, const std::filesystem::path& path) {
  const auto bytes = encode_mask(mask);
  detail::write_file(path, bytes.data(), bytes.size());
}

// Pixels brighter than mid-gray are set.
inline RegionMask load_mask(const std::filesystem::path& path) {
  const Image img = load_image(path);
  RegionMask m(img.geometry(), 0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) m(x, y) = img(x, y, 0) > 0.5 ? 1 : 0;
  return m;
}

inline nlohmann::json contour_to_json(const GeodesicPath& path) {
  nlohmann::json verts = nlohmann::json::array();
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    if (path.lifted())
      verts.push_back({path.vertices[i].x, path.vertices[i].y, path.thetas[i]});
    else
      verts.push_back({path.vertices[i].x, path.vertices[i].y});
  }
  return {{"closed", path.closed}, {"lifted", path.lifted()}, {"vertices", std::move(verts)}};
}

inline GeodesicPath contour_from_json(const nlohmann::json& j) {
  GeodesicPath p;
  try {
    p.closed = j.at("closed").get<bool>();
    const bool lifted = j.value("lifted", false);
    for (const auto& v : j.at("vertices")) {
      p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      if (lifted) p.thetas.push_back(v.at(2).get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad contour JSON: ") + e.what());
  }
  p.reparameterize();
  return p;
}

inline void save_contour(const GeodesicPath& path, const std::filesystem::path& file) {
  const std::string s = contour_to_json(path).dump(2) + "\n";
  detail::write_file(file, s.data(), s.size());
}

inline GeodesicPath load_contour(const std::filesystem::path& file) {
  const auto bytes = detail::read_file(file);
  try {
    return contour_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bad contour JSON: ") + e.what());
  }
}

// A polyline is [[x, y], ...]. A barrier document may also hold a list of
// polylines.
inline std::vector<Vec2> polyline_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("polyline must be an array of [x, y] pairs");
  std::vector<Vec2> out;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() < 2 || !v[0].is_number() || !v[1].is_number())
      throw FormatError("polyline vertex must be [x, y]");
    out.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return out;
}

inline std::vector<std::vector<Vec2>> polylines_from_json(const nlohmann::json& j) {
  if (j.is_array() && !j.empty() && j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
    std::vector<std::vector<Vec2>> out;
    for (const auto& l : j) out.push_back(polyline_from_json(l));
    return out;
  }
  return {polyline_from_json(j)};
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Binary float grid: uint32 width, uint32 height (little-endian), then
// width*height float32 values row-major. Infinite values are kept as IEEE inf.
inline std::vector<unsigned char> encode_float_grid(const ScalarField& f) {
  std::vector<unsigned char> out(8 + 4 * f.size());
  auto put32 = [&](std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[off + i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  };
  put32(0, static_cast<std::uint32_t>(f.width()));
  put32(4, static_cast<std::uint32_t>(f.height()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const float v = static_cast<float>(f.at_index(i));
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put32(8 + 4 * i, bits);
  }
  return out;
}

inline ScalarField decode_float_grid(const std::vector<unsigned char>& b) {
  if (b.size() < 8) throw FormatError("truncated float grid");
  auto get32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
    return v;
  };
  const std::uint32_t w = get32(0);
  const std::uint32_t h = get32(4);
  if (w == 0 || h == 0 || b.size() != 8 + 4ull * w * h) throw FormatError("float grid size mismatch");
  ScalarField f(GridGeometry(static_cast<int>(w), static_cast<int>(h)));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint32_t bits = get32(8 + 4 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    f.at_index(i) = v;
  }
  return f;
}

inline void save_float_grid(const ScalarField& f, const std::filesystem::path& path) {
  const auto bytes = encode_float_grid(f);
  detail::write_file(path, bytes.data(), bytes.size());
}

inline ScalarField load_float_grid(const std::filesystem::path& path) { return decode_float_grid(detail::read_file(path)); }

// Normalised 8-bit heatmap of the finite values; non-finite pixels are 255.
inline std::vector<unsigned char> encode_heatmap(const ScalarField& f) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : f.values()) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::vector<unsigned char> px(f.size(), 255);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = f.at_index(i);
    if (!std::isfinite(v)) continue;
    px[i] = hi > lo ? static_cast<unsigned char>(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
  }
  return encode_pgm(f.width(), f.height(), px);
}

}  // namespace geoseg
