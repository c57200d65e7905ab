#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veisim/simulation.hpp"

namespace veisim {

// ---------------------------------------------------------------------------
// Scenario documents
//
// JSON schema (all lengths in m, speeds in m/s, times in s, angles in deg):
//   {
//     "name": "one_vehicle_crossing",
//     "map": "intersection" | "straight_road",
//     "lane_width": 4.0,            // optional, default 4.0
//     "dt": 0.1,                    // optional, default 0.1
//     "t_max": 30.0,                // optional, default 30.0
//     "behavior": "aggressive" | "normal",
//     "escooter": {
//       "init": [x, y],
//       "destination": [x, y],
//       "decision_point": [x, y],
//       "params": { ... }           // optional overrides, see below
//     },
//     "vehicles": [
//       { "role": "parked" | "follower" | "crossing" | "passing",
//         "position": [x, y], "heading_deg": 90.0, "speed": 0.0,
//         "hazard": true,           // optional, defaults by role
//         "length": 4.6, "width": 1.8, "lf": 1.25, "lr": 1.25 }  // optional
//     ]
//   }
// Unknown keys are rejected at every level.
// ---------------------------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& obj,
                                         const char* key,
                                         const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(ctx + ": missing required key '" + key + "'");
  }
  return *it;
}

inline void check_keys(const nlohmann::json& obj,
                       std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  if (!obj.is_object()) {
    throw ScenarioError(ctx + ": expected an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      throw ScenarioError(ctx + ": unknown key '" + it.key() + "'");
    }
  }
}

inline double as_number(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_number()) throw ScenarioError(ctx + ": expected a number");
  return j.get<double>();
}

inline double number_field(const nlohmann::json& obj, const char* key,
                           const std::string& ctx) {
  return as_number(require_key(obj, key, ctx), ctx + "." + key);
}

inline double number_field_or(const nlohmann::json& obj, const char* key,
                              const std::string& ctx, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, ctx + "." + key);
}

inline std::string string_field(const nlohmann::json& obj, const char* key,
                                const std::string& ctx) {
  const nlohmann::json& j = require_key(obj, key, ctx);
  if (!j.is_string()) throw ScenarioError(ctx + "." + key + ": expected a string");
  return j.get<std::string>();
}

inline Vec2 vec2_field(const nlohmann::json& obj, const char* key,
                       const std::string& ctx) {
  const nlohmann::json& j = require_key(obj, key, ctx);
  const std::string where = ctx + "." + key;
  if (!j.is_array() || j.size() != 2) {
    throw ScenarioError(where + ": expected [x, y]");
  }
  return {as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
}

inline VehicleRole parse_role(const std::string& s, const std::string& ctx) {
  if (s == "parked") return VehicleRole::Parked;
  if (s == "follower") return VehicleRole::Follower;
  if (s == "crossing") return VehicleRole::Crossing;
  if (s == "passing") return VehicleRole::Passing;
  throw ScenarioError(ctx + ": unknown role '" + s + "'");
}

inline const char* role_name(VehicleRole r) {
  switch (r) {
    case VehicleRole::Parked: return "parked";
    case VehicleRole::Follower: return "follower";
    case VehicleRole::Crossing: return "crossing";
    case VehicleRole::Passing: return "passing";
  }
  return "parked";
}

// Crossing and passing vehicles threaten the e-scooter's path by default.
inline bool default_hazard(VehicleRole r) {
  return r == VehicleRole::Crossing || r == VehicleRole::Passing;
}

// Degrees value whose parse (normalize_angle(deg * pi / 180)) reproduces psi
// bit-exactly. The naive conversion double-rounds and can land one ulp off;
// any psi that originated from a parsed document is reachable within a few
// ulp steps.
inline double heading_degrees(double psi) {
  const double naive = psi * 180.0 / std::numbers::pi;
  auto back = [](double deg) {
    return normalize_angle(deg * std::numbers::pi / 180.0);
  };
  if (back(naive) == psi) return naive;
  for (double dir : {std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()}) {
    double candidate = naive;
    for (int i = 0; i < 8; ++i) {
      candidate = std::nextafter(candidate, dir);
      if (back(candidate) == psi) return candidate;
    }
  }
  return naive;
}

}  // namespace detail

inline const char* behavior_name(BehaviorType b) {
  return b == BehaviorType::Aggressive ? "aggressive" : "normal";
}

inline BehaviorType parse_behavior(const std::string& s) {
  if (s == "aggressive") return BehaviorType::Aggressive;
  if (s == "normal") return BehaviorType::Normal;
  throw ScenarioError("behavior: unknown value '" + s + "'");
}

inline const char* map_kind_name(MapKind m) {
  return m == MapKind::Intersection ? "intersection" : "straight_road";
}

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Collision: return "collision";
    case Outcome::ReachedDestination: return "reached_destination";
    case Outcome::Timeout: return "timeout";
  }
  return "timeout";
}

inline Scenario parse_scenario(const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::number_field_or;
  using detail::require_key;

  check_keys(doc,
             {"name", "map", "lane_width", "dt", "t_max", "behavior",
              "escooter", "vehicles"},
             "scenario");
  Scenario sc;
  sc.name = detail::string_field(doc, "name", "scenario");

  const std::string map = detail::string_field(doc, "map", "scenario");
  if (map == "intersection") {
    sc.map_kind = MapKind::Intersection;
  } else if (map == "straight_road") {
    sc.map_kind = MapKind::StraightRoad;
  } else {
    throw ScenarioError("scenario.map: unknown value '" + map + "'");
  }

  sc.lane_width = number_field_or(doc, "lane_width", "scenario", 4.0);
  sc.dt = number_field_or(doc, "dt", "scenario", 0.1);
  sc.t_max = number_field_or(doc, "t_max", "scenario", 30.0);
  sc.behavior = parse_behavior(detail::string_field(doc, "behavior", "scenario"));

  const nlohmann::json& esc = require_key(doc, "escooter", "scenario");
  check_keys(esc, {"init", "destination", "decision_point", "params"},
             "scenario.escooter");
  sc.escooter_init = detail::vec2_field(esc, "init", "scenario.escooter");
  sc.destination = detail::vec2_field(esc, "destination", "scenario.escooter");
  sc.decision_point =
      detail::vec2_field(esc, "decision_point", "scenario.escooter");

  EscooterParams p;
  p.crossing_threshold = default_crossing_threshold(sc.behavior);
  if (auto it = esc.find("params"); it != esc.end()) {
    const std::string ctx = "scenario.escooter.params";
    check_keys(*it,
               {"mass", "k_des", "v0", "sigma_des", "a_veh", "b_veh",
                "fov_radius", "fov_angle", "crossing_threshold", "v_max",
                "body_radius"},
               ctx);
    p.mass = number_field_or(*it, "mass", ctx, p.mass);
    p.k_des = number_field_or(*it, "k_des", ctx, p.k_des);
    p.v0 = number_field_or(*it, "v0", ctx, p.v0);
    p.sigma_des = number_field_or(*it, "sigma_des", ctx, p.sigma_des);
    p.a_veh = number_field_or(*it, "a_veh", ctx, p.a_veh);
    p.b_veh = number_field_or(*it, "b_veh", ctx, p.b_veh);
    p.fov_radius = number_field_or(*it, "fov_radius", ctx, p.fov_radius);
    p.fov_angle = number_field_or(*it, "fov_angle", ctx, p.fov_angle);
    p.crossing_threshold =
        number_field_or(*it, "crossing_threshold", ctx, p.crossing_threshold);
    p.v_max = number_field_or(*it, "v_max", ctx, p.v_max);
    p.body_radius = number_field_or(*it, "body_radius", ctx, p.body_radius);
  }
  sc.escooter_params = p;

  const nlohmann::json& vehicles = require_key(doc, "vehicles", "scenario");
  if (!vehicles.is_array()) {
    throw ScenarioError("scenario.vehicles: expected an array");
  }
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const std::string ctx = "scenario.vehicles[" + std::to_string(i) + "]";
    const nlohmann::json& v = vehicles[i];
    check_keys(v,
               {"role", "position", "heading_deg", "speed", "hazard", "length",
                "width", "lf", "lr"},
               ctx);
    VehicleAgent agent;
    agent.spec.role = detail::parse_role(detail::string_field(v, "role", ctx),
                                         ctx + ".role");
    const Vec2 pos = detail::vec2_field(v, "position", ctx);
    agent.state.x = pos.x;
    agent.state.y = pos.y;
    agent.state.psi = normalize_angle(detail::number_field(v, "heading_deg", ctx) *
                                      std::numbers::pi / 180.0);
    agent.state.v = detail::number_field(v, "speed", ctx);
    agent.spec.hazard = detail::default_hazard(agent.spec.role);
    if (auto it = v.find("hazard"); it != v.end()) {
      if (!it->is_boolean()) {
        throw ScenarioError(ctx + ".hazard: expected a boolean");
      }
      agent.spec.hazard = it->get<bool>();
    }
    agent.spec.length = number_field_or(v, "length", ctx, agent.spec.length);
    agent.spec.width = number_field_or(v, "width", ctx, agent.spec.width);
    agent.spec.lf = number_field_or(v, "lf", ctx, agent.spec.lf);
    agent.spec.lr = number_field_or(v, "lr", ctx, agent.spec.lr);
    sc.vehicles.push_back(agent);
  }

  validate(sc);
  return sc;
}

inline Scenario parse_scenario_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

// Canonical serialization; parse_scenario(to_json(sc)) == sc.
inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json doc;
  doc["name"] = sc.name;
  doc["map"] = map_kind_name(sc.map_kind);
  doc["lane_width"] = sc.lane_width;
  doc["dt"] = sc.dt;
  doc["t_max"] = sc.t_max;
  doc["behavior"] = behavior_name(sc.behavior);
  const EscooterParams& p = sc.escooter_params;
  doc["escooter"] = {
      {"init", {sc.escooter_init.x, sc.escooter_init.y}},
      {"destination", {sc.destination.x, sc.destination.y}},
      {"decision_point", {sc.decision_point.x, sc.decision_point.y}},
      {"params",
       {{"mass", p.mass},
        {"k_des", p.k_des},
        {"v0", p.v0},
        {"sigma_des", p.sigma_des},
        {"a_veh", p.a_veh},
        {"b_veh", p.b_veh},
        {"fov_radius", p.fov_radius},
        {"fov_angle", p.fov_angle},
        {"crossing_threshold", p.crossing_threshold},
        {"v_max", p.v_max},
        {"body_radius", p.body_radius}}}};
  doc["vehicles"] = nlohmann::json::array();
  for (const VehicleAgent& a : sc.vehicles) {
    doc["vehicles"].push_back({{"role", detail::role_name(a.spec.role)},
                               {"position", {a.state.x, a.state.y}},
                               {"heading_deg", detail::heading_degrees(a.state.psi)},
                               {"speed", a.state.v},
                               {"hazard", a.spec.hazard},
                               {"length", a.spec.length},
                               {"width", a.spec.width},
                               {"lf", a.spec.lf},
                               {"lr", a.spec.lr}});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Parameter grids
//
// JSON schema:
//   { "symbols": { "<symbol>": { "lower": a, "upper": b, "step": s }, ... } }
//
// Recognized symbols (applied to the base scenario by expand_grid):
//   y_veh0, y_veh1      - y position of vehicle 0 / 1
//   y_veh2_init,
//   x_veh2_init         - initial position components of vehicle 2
//   x_veh3_init         - initial x of vehicle 3
//   v_veh2, v_veh3      - speeds of vehicles 2 / 3
//   y_esc_init          - e-scooter initial y
//   x_des, y_des        - destination components
//   r_fov               - FOV radius
//   alpha_fov           - FOV opening angle, degrees
// ---------------------------------------------------------------------------

struct GridRange {
  double lower{0.0};
  double upper{0.0};
  double step{1.0};  // > 0

  bool operator==(const GridRange&) const = default;
};

struct ParameterGrid {
  std::map<std::string, GridRange> symbols;
};

// Sweep symbols in their documented expansion order: the first listed symbol
// varies slowest, values ascend within each symbol.
inline const std::vector<std::string>& grid_symbol_order() {
  static const std::vector<std::string> order = {
      "y_veh0", "y_veh1",     "y_veh2_init", "x_veh2_init",
      "x_veh3_init", "v_veh2", "v_veh3",     "y_esc_init",
      "x_des",  "y_des",      "r_fov",       "alpha_fov"};
  return order;
}

// lower, lower+step, ... up to upper inclusive (1e-9 slack for the endpoint).
inline std::vector<double> grid_values(const GridRange& r) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = r.lower + i * r.step;
    if (v > r.upper + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

inline ParameterGrid parse_grid(const nlohmann::json& doc) {
  detail::check_keys(doc, {"symbols"}, "grid");
  const nlohmann::json& symbols = detail::require_key(doc, "symbols", "grid");
  if (!symbols.is_object()) {
    throw ScenarioError("grid.symbols: expected an object");
  }
  ParameterGrid grid;
  const auto& order = grid_symbol_order();
  for (auto it = symbols.begin(); it != symbols.end(); ++it) {
    if (std::find(order.begin(), order.end(), it.key()) == order.end()) {
      throw ScenarioError("grid.symbols: unknown symbol '" + it.key() + "'");
    }
    const std::string ctx = "grid.symbols." + it.key();
    detail::check_keys(*it, {"lower", "upper", "step"}, ctx);
    GridRange r;
    r.lower = detail::number_field(*it, "lower", ctx);
    r.upper = detail::number_field(*it, "upper", ctx);
    r.step = detail::number_field(*it, "step", ctx);
    if (!(r.step > 0.0)) throw ScenarioError(ctx + ".step: must be > 0");
    if (!(r.lower <= r.upper)) {
      throw ScenarioError(ctx + ": lower must be <= upper");
    }
    grid.symbols.emplace(it.key(), r);
  }
  return grid;
}

inline ParameterGrid parse_grid_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("parse error: ") + e.what());
  }
  return parse_grid(doc);
}

inline ParameterGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open grid file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grid_text(buf.str());
}

// One point of the Cartesian product, symbol/value pairs in expansion order.
struct GridAssignment {
  std::vector<std::pair<std::string, double>> values;
};

inline std::vector<GridAssignment> enumerate_grid(const ParameterGrid& grid) {
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const std::string& symbol : grid_symbol_order()) {
    auto it = grid.symbols.find(symbol);
    if (it != grid.symbols.end()) {
      axes.emplace_back(symbol, grid_values(it->second));
    }
  }
  std::vector<GridAssignment> out;
  size_t total = 1;
  for (const auto& [_, values] : axes) total *= values.size();
  out.reserve(total);
  std::vector<size_t> idx(axes.size(), 0);
  for (size_t n = 0; n < total; ++n) {
    GridAssignment a;
    a.values.reserve(axes.size());
    for (size_t i = 0; i < axes.size(); ++i) {
      a.values.emplace_back(axes[i].first, axes[i].second[idx[i]]);
    }
    out.push_back(std::move(a));
    // odometer increment, last axis fastest
    for (size_t i = axes.size(); i-- > 0;) {
      if (++idx[i] < axes[i].second.size()) break;
      idx[i] = 0;
    }
  }
  return out;
}

inline Scenario apply_assignment(const Scenario& base, const GridAssignment& a) {
  Scenario sc = base;
  auto vehicle_at = [&](size_t i, const std::string& symbol) -> VehicleAgent& {
    if (i >= sc.vehicles.size()) {
      throw ScenarioError("grid symbol '" + symbol +
                          "' refers to vehicle " + std::to_string(i) +
                          " which the scenario does not define");
    }
    return sc.vehicles[i];
  };
  for (const auto& [symbol, value] : a.values) {
    if (symbol == "y_veh0") {
      vehicle_at(0, symbol).state.y = value;
    } else if (symbol == "y_veh1") {
      vehicle_at(1, symbol).state.y = value;
    } else if (symbol == "y_veh2_init") {
      vehicle_at(2, symbol).state.y = value;
    } else if (symbol == "x_veh2_init") {
      vehicle_at(2, symbol).state.x = value;
    } else if (symbol == "x_veh3_init") {
      vehicle_at(3, symbol).state.x = value;
    } else if (symbol == "v_veh2") {
      vehicle_at(2, symbol).state.v = value;
    } else if (symbol == "v_veh3") {
      vehicle_at(3, symbol).state.v = value;
    } else if (symbol == "y_esc_init") {
      sc.escooter_init.y = value;
    } else if (symbol == "x_des") {
      sc.destination.x = value;
    } else if (symbol == "y_des") {
      sc.destination.y = value;
    } else if (symbol == "r_fov") {
      sc.escooter_params.fov_radius = value;
    } else if (symbol == "alpha_fov") {
      sc.escooter_params.fov_angle = value;
    } else {
      throw ScenarioError("unknown grid symbol '" + symbol + "'");
    }
  }
  return sc;
}

// Cartesian expansion of the grid over the base scenario. Every returned
// scenario passes validation.
inline std::vector<Scenario> expand_grid(const Scenario& base,
                                         const ParameterGrid& grid) {
  std::vector<GridAssignment> assignments = enumerate_grid(grid);
  std::vector<Scenario> out;
  out.reserve(assignments.size());
  for (const GridAssignment& a : assignments) {
    Scenario sc = apply_assignment(base, a);
    validate(sc);
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace veisim
