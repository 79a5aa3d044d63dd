#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "geoseg/dualcut.hpp"
#include "geoseg/error.hpp"

namespace geoseg {

inline nlohmann::json config_to_json(const DualCutConfig& c) {
  return {{"metric", to_string(c.metric)},
          {"alpha", c.alpha},
          {"alpha_tilde", c.alpha_tilde},
          {"alpha_p", c.alpha_p},
          {"lambda", c.lambda},
          {"lambda_sign", c.lambda_sign},
          {"beta", c.beta},
          {"ntheta", c.n_theta},
          {"sigma", c.sigma},
          {"mu", c.region.mu},
          {"T", c.region.T},
          {"tau", c.region.tau},
          {"tau_eps", c.region.tau_eps},
          {"stencil_radius", c.stencil_radius}};
}

// Applies the keys present in `j` on top of `base` and validates the result.
// Unknown keys and wrongly typed values are parameter errors.
inline DualCutConfig config_from_json(const nlohmann::json& j, DualCutConfig base = {}) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  auto num = [&](const std::string& k, const nlohmann::json& v) {
    if (!v.is_number()) throw ParameterError("config key '" + k + "' must be a number");
    return v.get<double>();
  };
  auto integer = [&](const std::string& k, const nlohmann::json& v) {
    if (!v.is_number_integer()) throw ParameterError("config key '" + k + "' must be an integer");
    return v.get<int>();
  };
  for (const auto& [k, v] : j.items()) {
    if (k == "metric") {
      if (!v.is_string()) throw ParameterError("config key 'metric' must be a string");
      base.metric = parse_metric_choice(v.get<std::string>());
    } else if (k == "alpha") {
      base.alpha = num(k, v);
    } else if (k == "alpha_tilde") {
      base.alpha_tilde = num(k, v);
    } else if (k == "alpha_p") {
      base.alpha_p = num(k, v);
    } else if (k == "lambda") {
      // A signed value sets both magnitude and sign.
      const double l = num(k, v);
      base.lambda = std::abs(l);
      if (l < 0.0) base.lambda_sign = -1;
    } else if (k == "lambda_sign") {
      base.lambda_sign = integer(k, v);
    } else if (k == "beta") {
      base.beta = num(k, v);
    } else if (k == "ntheta") {
      base.n_theta = integer(k, v);
    } else if (k == "sigma") {
      base.sigma = num(k, v);
    } else if (k == "mu") {
      base.region.mu = num(k, v);
    } else if (k == "T") {
      base.region.T = num(k, v);
    } else if (k == "tau") {
      base.region.tau = num(k, v);
    } else if (k == "tau_eps") {
      base.region.tau_eps = num(k, v);
    } else if (k == "stencil_radius") {
      base.stencil_radius = integer(k, v);
    } else {
      throw ParameterError("unknown config key '" + k + "'");
    }
  }
  base.validate();
  return base;
}

// key=value lines; '#' starts a comment. Values are parsed as JSON scalars,
// falling back to a plain string.
inline nlohmann::json parse_key_value(const std::string& text) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      j[key] = nlohmann::json::parse(val);
    } catch (const nlohmann::json::parse_error&) {
      j[key] = val;
    }
  }
  return j;
}

inline DualCutConfig load_config(const std::filesystem::path& path, DualCutConfig base = {}) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return config_from_json(nlohmann::json::parse(text), base);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParameterError(std::string("config: ") + e.what());
    }
  }
  return config_from_json(parse_key_value(text), base);
}

}  // namespace geoseg
