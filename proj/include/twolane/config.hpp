#pragma once

/**
 * @brief JSON run configuration. Schema (all keys optional unless noted):
 *
 *   scenario    preset name used as the base; other keys override it
 *   domain      [x_min, x_max]                      default [-4, 4]
 *   n_cells     integer >= 2                         default 1600
 *   cfl         number in (0, 1]                     default 0.5
 *   eta         number >= 0 (0 = local model)
 *   eta_list    [number >= 0, ...]
 *   out_times   sorted [number >= 0, ...]            required without scenario
 *   max_dt      number > 0
 *   rho_max     [m1, m2]                             default [1, 1]
 *   velocity    {v_free, rho_ref} or a pair of them  Greenshields, default {1, 1}
 *   lane_change {type: "indicator", a, b, scale} | {type: "constant", c}
 *   initial     {lane1: [segment...], lane2: [segment...]}, required without scenario
 *               segment = {value, from?, to?}; cells average overlapping segments
 *
 * Unknown keys are rejected. Every error names the offending field.
 */

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "twolane/core.hpp"
#include "twolane/models.hpp"

namespace twolane {

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& field, const std::string& what) { throw ConfigError("config: " + field + ": " + what); }

inline double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) config_fail(field, "expected a number");
  return j.get<double>();
}

inline void check_keys(const json& obj, const std::string& field, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_fail(field, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) config_fail(field.empty() ? key : field + "." + key, "unknown key");
  }
}

inline std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) config_fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number_at(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

inline VelocityLaw parse_velocity(const json& j, const std::string& field) {
  check_keys(j, field, {"v_free", "rho_ref"});
  const double v_free = j.contains("v_free") ? number_at(j["v_free"], field + ".v_free") : 1.0;
  const double rho_ref = j.contains("rho_ref") ? number_at(j["rho_ref"], field + ".rho_ref") : 1.0;
  if (!(v_free > 0.0)) config_fail(field + ".v_free", "must be > 0");
  if (!(rho_ref > 0.0)) config_fail(field + ".rho_ref", "must be > 0");
  return greenshields(v_free, rho_ref);
}

inline LaneChange parse_lane_change(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) config_fail(field + ".type", "expected \"indicator\" or \"constant\"");
  const auto type = j["type"].get<std::string>();
  if (type == "indicator") {
    check_keys(j, field, {"type", "a", "b", "scale"});
    if (!j.contains("a") || !j.contains("b")) config_fail(field, "indicator needs a and b");
    const double a = number_at(j["a"], field + ".a");
    const double b = number_at(j["b"], field + ".b");
    const double scale = j.contains("scale") ? number_at(j["scale"], field + ".scale") : 1.0;
    if (!(b > a)) config_fail(field, "indicator needs a < b");
    if (!(scale >= 0.0)) config_fail(field + ".scale", "must be >= 0");
    return indicator_rate(a, b, scale);
  }
  if (type == "constant") {
    check_keys(j, field, {"type", "c"});
    const double c = j.contains("c") ? number_at(j["c"], field + ".c") : 0.0;
    if (!(c >= 0.0)) config_fail(field + ".c", "must be >= 0");
    return constant_rate(c);
  }
  config_fail(field + ".type", "expected \"indicator\" or \"constant\", got \"" + type + "\"");
}

inline std::vector<Segment> parse_segments(const json& j, const std::string& field, double rho_max) {
  if (!j.is_array()) config_fail(field, "expected an array of segments");
  std::vector<Segment> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string f = field + "[" + std::to_string(k) + "]";
    check_keys(j[k], f, {"value", "from", "to"});
    if (!j[k].contains("value")) config_fail(f + ".value", "missing");
    Segment s;
    s.value = number_at(j[k]["value"], f + ".value");
    if (j[k].contains("from")) s.from = number_at(j[k]["from"], f + ".from");
    if (j[k].contains("to")) s.to = number_at(j[k]["to"], f + ".to");
    if (!(s.value >= 0.0 && s.value <= rho_max)) {
      std::ostringstream msg;
      msg << "initial density " << s.value << " outside [0, rho_max = " << rho_max << "]";
      config_fail(f + ".value", msg.str());
    }
    if (!(s.to > s.from)) config_fail(f, "segment needs from < to");
    out.push_back(s);
  }
  return out;
}

}  // namespace detail

inline SimulationConfig parse_config(std::string_view text) {
  using detail::config_fail;
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  detail::check_keys(doc, "", {"scenario", "domain", "n_cells", "cfl", "eta", "eta_list", "out_times", "max_dt", "rho_max", "velocity", "lane_change", "initial"});

  SimulationConfig c;
  const bool preset = doc.contains("scenario");
  if (preset) {
    if (!doc["scenario"].is_string()) config_fail("scenario", "expected a string");
    try {
      c = scenario(doc["scenario"].get<std::string>());
    } catch (const ConfigError& e) {
      config_fail("scenario", e.what());
    }
  } else {
    c.name = "custom";
    c.model.velocity = {greenshields(1.0, 1.0), greenshields(1.0, 1.0)};
    c.model.rho_max = {1.0, 1.0};
    c.model.lane_change = no_lane_change();
    c.model.eta = 0.0;
    if (!doc.contains("initial")) config_fail("initial", "missing (required without a scenario)");
    if (!doc.contains("out_times")) config_fail("out_times", "missing (required without a scenario)");
  }

  double x_min = c.grid.x_min(), x_max = c.grid.x_max();
  std::size_t n_cells = c.grid.n_cells();
  if (doc.contains("domain")) {
    const auto d = detail::number_list(doc["domain"], "domain");
    if (d.size() != 2) config_fail("domain", "expected [x_min, x_max]");
    if (!(d[1] > d[0])) config_fail("domain", "x_max must exceed x_min");
    x_min = d[0];
    x_max = d[1];
  }
  if (doc.contains("n_cells")) {
    if (!doc["n_cells"].is_number_integer() || doc["n_cells"].get<long long>() < 2) config_fail("n_cells", "expected an integer >= 2");
    n_cells = static_cast<std::size_t>(doc["n_cells"].get<long long>());
  }
  c.grid = Grid(x_min, x_max, n_cells);

  if (doc.contains("cfl")) {
    c.cfl = detail::number_at(doc["cfl"], "cfl");
    if (!(c.cfl > 0.0 && c.cfl <= 1.0)) config_fail("cfl", "must lie in (0, 1]");
  }
  if (doc.contains("max_dt")) {
    c.max_dt = detail::number_at(doc["max_dt"], "max_dt");
    if (!(c.max_dt > 0.0)) config_fail("max_dt", "must be > 0");
  }
  if (doc.contains("eta_list")) {
    c.eta_list = detail::number_list(doc["eta_list"], "eta_list");
    if (c.eta_list.empty()) config_fail("eta_list", "must not be empty");
    for (std::size_t k = 0; k < c.eta_list.size(); ++k)
      if (!(c.eta_list[k] >= 0.0)) config_fail("eta_list[" + std::to_string(k) + "]", "eta must be >= 0");
    c.model.eta = c.eta_list.front();
  }
  if (doc.contains("eta")) {
    c.model.eta = detail::number_at(doc["eta"], "eta");
    if (!(c.model.eta >= 0.0)) config_fail("eta", "eta must be >= 0");
    if (!doc.contains("eta_list")) c.eta_list = {c.model.eta};
  } else if (!preset && !doc.contains("eta_list")) {
    c.eta_list = {0.0};
  }
  if (doc.contains("out_times")) {
    c.out_times = detail::number_list(doc["out_times"], "out_times");
    for (std::size_t k = 0; k < c.out_times.size(); ++k) {
      if (!(c.out_times[k] >= 0.0)) config_fail("out_times[" + std::to_string(k) + "]", "must be >= 0");
      if (k > 0 && c.out_times[k] < c.out_times[k - 1]) config_fail("out_times", "must be sorted ascending");
    }
  }
  if (doc.contains("rho_max")) {
    const auto m = detail::number_list(doc["rho_max"], "rho_max");
    if (m.size() != 2) config_fail("rho_max", "expected [rho1_max, rho2_max]");
    for (int i = 0; i < 2; ++i)
      if (!(m[i] > 0.0)) config_fail("rho_max[" + std::to_string(i) + "]", "must be > 0");
    c.model.rho_max = {m[0], m[1]};
  }
  if (doc.contains("velocity")) {
    const auto& v = doc["velocity"];
    if (v.is_array()) {
      if (v.size() != 2) config_fail("velocity", "expected one object or a pair");
      c.model.velocity = {detail::parse_velocity(v[0], "velocity[0]"), detail::parse_velocity(v[1], "velocity[1]")};
    } else {
      const auto law = detail::parse_velocity(v, "velocity");
      c.model.velocity = {law, law};
    }
  }
  if (doc.contains("lane_change")) c.model.lane_change = detail::parse_lane_change(doc["lane_change"], "lane_change");
  if (doc.contains("initial")) {
    detail::check_keys(doc["initial"], "initial", {"lane1", "lane2"});
    std::array<std::vector<Segment>, n_lanes> segs;
    const char* names[] = {"lane1", "lane2"};
    for (int i = 0; i < n_lanes; ++i)
      if (doc["initial"].contains(names[i])) segs[i] = detail::parse_segments(doc["initial"][names[i]], std::string("initial.") + names[i], c.model.rho_max[i]);
    c.initial = piecewise_profile(std::move(segs));
  }

  const auto violations = validate_model(c.model, c.grid.x_min(), c.grid.x_max());
  if (!violations.empty()) {
    std::string msg = "config: model violates its assumptions:";
    for (const auto& v : violations) msg += "\n  " + v.message();
    throw ConfigError(msg);
  }
  const auto init = c.initial_state();
  for (int i = 0; i < n_lanes; ++i)
    for (std::size_t j = 0; j < init.n_cells(); ++j)
      if (!(init.rho[i][j] >= 0.0 && init.rho[i][j] <= c.model.rho_max[i] * (1.0 + 1e-12)))
        config_fail(std::string("initial.lane") + std::to_string(i + 1), "overlapping segments exceed rho_max in cell " + std::to_string(j));
  return c;
}

inline SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace twolane
