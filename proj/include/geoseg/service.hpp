#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "geoseg/config.hpp"
#include "geoseg/dualcut.hpp"
#include "geoseg/error.hpp"
#include "geoseg/export.hpp"
#include "geoseg/io.hpp"

namespace geoseg {

// In-memory sessions. Segmentation inside a session is single-flight; the
// remaining state is guarded by a separate mutex and results are immutable
// snapshots.
class SessionStore {
 public:
  struct Session {
    Image image;
    DualCutConfig config;
    std::vector<std::vector<Vec2>> foreground;
    std::vector<std::vector<Vec2>> barriers;
    std::shared_ptr<const FeatureCache> features;
    std::shared_ptr<const SegmentationResult> last;
    std::mutex state;
    std::mutex run;
  };

  std::string create(Image img) {
    auto s = std::make_shared<Session>();
    s->image = std::move(img);
    std::unique_lock lock(mu_);
    std::string id;
    do {
      id = make_id();
    } while (sessions_.count(id));
    sessions_.emplace(id, std::move(s));
    return id;
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  bool erase(const std::string& id) {
    std::unique_lock lock(mu_);
    return sessions_.erase(id) > 0;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }

 private:
  std::string make_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::uint64_t v = rng_();
    std::string s(16, '0');
    for (char& c : s) {
      c = kHex[v & 0xfu];
      v >>= 4;
    }
    return s;
  }

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

// Runs one segmentation on a session. Throws Error subclasses for bad input;
// returns nullptr when another run holds the session.
inline std::shared_ptr<const SegmentationResult> run_session(SessionStore::Session& s,
                                                             const std::optional<Point>& seed) {
  std::unique_lock run(s.run, std::try_to_lock);
  if (!run.owns_lock()) return nullptr;
  Image img;
  DualCutConfig cfg;
  SeedInput in;
  std::shared_ptr<const FeatureCache> cache;
  {
    std::lock_guard lock(s.state);
    img = s.image;
    cfg = s.config;
    if (!s.foreground.empty()) in.scribble = s.foreground.back();
    in.barriers = s.barriers;
    cache = s.features;
  }
  in.point = seed;
  if (seed) in.scribble.clear();
  if (!cache || cache->sigma != cfg.sigma) {
    auto fresh = std::make_shared<FeatureCache>();
    fresh->sigma = cfg.sigma;
    fresh->edges = compute_edge_features(img, cfg.sigma);
    cache = fresh;
  }
  auto result = std::make_shared<const SegmentationResult>(segment(img, in, cfg, cache.get()));
  std::lock_guard lock(s.state);
  if (s.config.sigma == cache->sigma) s.features = cache;
  s.last = result;
  return result;
}

namespace detail {

inline void reply(httplib::Response& res, int status, nlohmann::json body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void fail(httplib::Response& res, int status, const std::string& msg, const std::string& kind = "") {
  nlohmann::json j{{"ok", false}, {"error", msg}};
  if (!kind.empty()) j["kind"] = kind;
  reply(res, status, std::move(j));
}

inline std::string error_kind(const Error& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const TopologyError*>(&e)) return "topology";
  if (dynamic_cast<const InitializationError*>(&e)) return "initialization";
  if (dynamic_cast<const DegenerateRegionError*>(&e)) return "degenerate_region";
  return "numerical";
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError(std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace detail

inline void install_routes(httplib::Server& srv, SessionStore& store) {
  using detail::fail;
  using detail::reply;
  using Json = nlohmann::json;

  auto with_session = [&store](const httplib::Request& req, httplib::Response& res) {
    auto s = store.find(req.matches[1]);
    if (!s) fail(res, 404, "unknown session");
    return s;
  };

  srv.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
    std::string bytes;
    if (req.has_file("image"))
      bytes = req.get_file_value("image").content;
    else
      bytes = req.body;
    if (bytes.empty()) return fail(res, 422, "missing image upload (multipart field 'image')", "parameter");
    try {
      Image img = decode_image(std::vector<unsigned char>(bytes.begin(), bytes.end()));
      const int w = img.width(), h = img.height();
      const std::string id = store.create(std::move(img));
      reply(res, 200, {{"ok", true}, {"id", id}, {"width", w}, {"height", h}});
    } catch (const Error& e) {
      fail(res, 422, e.what(), detail::error_kind(e));
    }
  });

  srv.Get(R"(/sessions/([0-9a-f]+)/config)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    std::lock_guard lock(s->state);
    reply(res, 200, {{"ok", true}, {"config", config_to_json(s->config)}});
  });

  srv.Put(R"(/sessions/([0-9a-f]+)/config)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    try {
      const Json body = detail::parse_body(req);
      std::lock_guard lock(s->state);
      const DualCutConfig cfg = config_from_json(body, s->config);
      if (cfg.sigma != s->config.sigma) s->features.reset();
      s->config = cfg;
      reply(res, 200, {{"ok", true}, {"config", config_to_json(cfg)}});
    } catch (const Error& e) {
      fail(res, 422, e.what(), "parameter");
    }
  });

  srv.Post(R"(/sessions/([0-9a-f]+)/scribbles)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    try {
      const Json body = detail::parse_body(req);
      const std::string type = body.value("type", "");
      if (type != "foreground" && type != "barrier")
        throw ParameterError("scribble type must be 'foreground' or 'barrier'");
      if (!body.contains("polyline")) throw ParameterError("missing 'polyline'");
      std::vector<Vec2> line = polyline_from_json(body["polyline"]);
      if (line.empty()) throw ParameterError("empty polyline");
      std::lock_guard lock(s->state);
      const GridGeometry g = s->image.geometry();
      for (Vec2& v : line) {
        v.x = std::clamp(v.x, 0.0, g.width - 1.0);
        v.y = std::clamp(v.y, 0.0, g.height - 1.0);
      }
      auto& list = type == "foreground" ? s->foreground : s->barriers;
      list.push_back(std::move(line));
      reply(res, 200, {{"ok", true}, {"foreground", s->foreground.size()}, {"barrier", s->barriers.size()}});
    } catch (const Error& e) {
      fail(res, 422, e.what(), "parameter");
    }
  });

  srv.Delete(R"(/sessions/([0-9a-f]+)/scribbles)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    std::lock_guard lock(s->state);
    s->foreground.clear();
    s->barriers.clear();
    reply(res, 200, {{"ok", true}});
  });

  srv.Post(R"(/sessions/([0-9a-f]+)/segment)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto s = with_session(req, res);
    if (!s) return;
    const std::string id = req.matches[1];
    try {
      const Json body = detail::parse_body(req);
      std::optional<Point> seed;
      if (body.contains("seed")) {
        const auto& p = body["seed"];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
          throw ParameterError("seed must be [x, y] integers");
        seed = Point{p[0].get<int>(), p[1].get<int>()};
      }
      const auto r = run_session(*s, seed);
      if (!r) return fail(res, 409, "a segmentation is already running for this session");
      Json j = result_summary(*r);
      j["ok"] = true;
      Json urls = Json::object();
      for (const auto& n : field_names()) urls[n] = "/sessions/" + id + "/fields/" + n;
      j["fields"] = std::move(urls);
      reply(res, 200, std::move(j));
    } catch (const NumericalError& e) {
      fail(res, 500, e.what(), "numerical");
    } catch (const Error& e) {
      fail(res, 422, e.what(), detail::error_kind(e));
    }
  });

  srv.Get(R"(/sessions/([0-9a-f]+)/fields/([A-Za-z_]+\.[a-z0-9]+))",
          [with_session](const httplib::Request& req, httplib::Response& res) {
            auto s = with_session(req, res);
            if (!s) return;
            std::shared_ptr<const SegmentationResult> r;
            {
              std::lock_guard lock(s->state);
              r = s->last;
            }
            if (!r) return fail(res, 404, "no segmentation result yet");
            const auto blob = export_field(*r, req.matches[2]);
            if (!blob) return fail(res, 404, "unknown field '" + std::string(req.matches[2]) + "'");
            res.status = 200;
            res.set_content(blob->body, blob->content_type);
          });

  srv.Delete(R"(/sessions/([0-9a-f]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    if (!store.erase(req.matches[1])) return fail(res, 404, "unknown session");
    reply(res, 200, {{"ok", true}});
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) fail(res, res.status, httplib::status_message(res.status));
    return httplib::Server::HandlerResponse::Handled;
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    fail(res, 500, msg);
  });
}

}  // namespace geoseg
