#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "veisim/scenario_io.hpp"
#include "veisim/simulation.hpp"

namespace veisim {

struct SweepRow {
  size_t episode_id{0};  // position in the expanded grid, 0-based
  std::string use_case;
  BehaviorType behavior{BehaviorType::Aggressive};
  std::vector<std::pair<std::string, double>> symbols;  // swept values only
  Outcome outcome{Outcome::Timeout};
  double t_event{0.0};
  double min_separation{0.0};
};

struct SweepResult {
  std::vector<SweepRow> rows;  // input order, independent of schedule
  size_t episodes{0};
  size_t collisions{0};
  double collision_rate{0.0};  // percent
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline SweepResult run_sweep_impl(std::span<const Scenario> scenarios,
                                  std::span<const GridAssignment> assignments,
                                  int workers) {
  if (scenarios.empty()) {
    throw ScenarioError("run_sweep: empty scenario list");
  }
  for (size_t i = 0; i < scenarios.size(); ++i) {
    try {
      validate(scenarios[i]);
    } catch (const ScenarioError& e) {
      throw ScenarioError("scenario " + std::to_string(i) + " ('" +
                          scenarios[i].name + "'): " + e.what());
    }
  }

  SweepResult result;
  result.rows.resize(scenarios.size());

  const size_t n = scenarios.size();
  const size_t thread_count =
      std::min<size_t>(std::max(workers, 1), n);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) break;
      try {
        const EpisodeResult ep = run_episode(scenarios[i]);
        SweepRow& row = result.rows[i];
        row.episode_id = i;
        row.use_case = scenarios[i].name;
        row.behavior = scenarios[i].behavior;
        if (!assignments.empty()) row.symbols = assignments[i].values;
        row.outcome = ep.outcome;
        row.t_event = ep.t_event;
        row.min_separation = ep.min_separation;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        break;
      }
    }
  };

  if (thread_count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (size_t t = 0; t < thread_count; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // aggregate after the join, in input order
  result.episodes = result.rows.size();
  for (const SweepRow& row : result.rows) {
    if (row.outcome == Outcome::Collision) ++result.collisions;
  }
  result.collision_rate =
      100.0 * static_cast<double>(result.collisions) /
      static_cast<double>(result.episodes);
  return result;
}

}  // namespace detail

inline SweepResult run_sweep(std::span<const Scenario> scenarios,
                             int workers = 1) {
  return detail::run_sweep_impl(scenarios, {}, workers);
}

inline SweepResult run_sweep(const std::vector<Scenario>& scenarios,
                             int workers = 1) {
  return detail::run_sweep_impl(scenarios, {}, workers);
}

// Grid-driven sweep; rows carry the swept symbol values for the CSV columns.
inline SweepResult run_sweep(const Scenario& base, const ParameterGrid& grid,
                             int workers = 1) {
  const std::vector<GridAssignment> assignments = enumerate_grid(grid);
  std::vector<Scenario> scenarios;
  scenarios.reserve(assignments.size());
  for (const GridAssignment& a : assignments) {
    scenarios.push_back(apply_assignment(base, a));
  }
  return detail::run_sweep_impl(scenarios, assignments, workers);
}

// Signed percentage-point difference, b relative to a.
inline double compare_rates(const SweepResult& a, const SweepResult& b) {
  return b.collision_rate - a.collision_rate;
}

inline const std::vector<std::string>& results_csv_symbol_columns() {
  static const std::vector<std::string> cols = {
      "y_veh0", "y_veh1", "x_veh2_init", "y_veh2_init", "x_veh3_init",
      "v_veh2", "v_veh3", "y_esc_init",  "x_des",       "y_des",
      "r_fov",  "alpha_fov"};
  return cols;
}

// Per-episode rows; swept symbols only, inapplicable columns blank.
inline std::string results_csv(const SweepResult& r) {
  std::string out =
      "episode_id,use_case,behavior,y_veh0,y_veh1,x_veh2_init,y_veh2_init,"
      "x_veh3_init,v_veh2,v_veh3,y_esc_init,x_des,y_des,r_fov,alpha_fov,"
      "outcome,t_event_s,min_separation_m\n";
  for (const SweepRow& row : r.rows) {
    out += std::to_string(row.episode_id);
    out += ',';
    out += row.use_case;
    out += ',';
    out += behavior_name(row.behavior);
    for (const std::string& col : results_csv_symbol_columns()) {
      out += ',';
      for (const auto& [symbol, value] : row.symbols) {
        if (symbol == col) {
          out += detail::format_number(value);
          break;
        }
      }
    }
    out += ',';
    out += outcome_name(row.outcome);
    out += ',';
    out += detail::format_number(row.t_event);
    out += ',';
    out += detail::format_number(row.min_separation);
    out += '\n';
  }
  return out;
}

// Aggregate counts and the collision rate as a two-decimal percentage.
inline std::string summary_json(const SweepResult& r) {
  size_t reached = 0;
  size_t timeout = 0;
  for (const SweepRow& row : r.rows) {
    if (row.outcome == Outcome::ReachedDestination) ++reached;
    if (row.outcome == Outcome::Timeout) ++timeout;
  }
  char rate[32];
  std::snprintf(rate, sizeof(rate), "%.2f", r.collision_rate);
  nlohmann::json doc;
  doc["use_case"] = r.rows.empty() ? "" : r.rows.front().use_case;
  doc["behavior"] =
      r.rows.empty() ? "" : behavior_name(r.rows.front().behavior);
  doc["episodes"] = r.episodes;
  doc["collisions"] = r.collisions;
  doc["collision_rate_pct"] = rate;
  doc["outcome_counts"] = {{"collision", r.collisions},
                           {"reached_destination", reached},
                           {"timeout", timeout}};
  return doc.dump(2) + "\n";
}

// Writes <dir>/<stem>.csv and <dir>/<stem>_summary.json.
inline void write_results(const SweepResult& r, const std::string& dir,
                          const std::string& stem = "results") {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream csv(fs::path(dir) / (stem + ".csv"), std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write results CSV in " + dir);
    csv << results_csv(r);
  }
  {
    std::ofstream summary(fs::path(dir) / (stem + "_summary.json"),
                          std::ios::binary);
    if (!summary) throw std::runtime_error("cannot write summary in " + dir);
    summary << summary_json(r);
  }
}

// ---------------------------------------------------------------------------
// Trajectory logs
//
// CSV with '#'-prefixed metadata lines, then a header row and one row per
// logged step:
//   # veisim-trajectory v1
//   # name=..., map=..., lane_width=..., destination=x,y ...
//   # vehicle=role:crossing,hazard:1,length:4.6,width:1.8
//   t,esc_x,esc_y,esc_vx,esc_vy,esc_mode,veh0_x,veh0_y,veh0_psi,veh0_v,...
// ---------------------------------------------------------------------------

struct TrajectoryLog {
  std::string name;
  MapKind map_kind{MapKind::Intersection};
  double lane_width{4.0};
  Vec2 destination;
  Vec2 decision_point;
  double fov_radius{10.0};
  double fov_angle{120.0};
  double body_radius{0.4};
  std::vector<VehicleSpec> vehicle_specs;
  std::vector<TrajectoryStep> steps;
};

inline const char* fsm_phase_name(FsmPhase m) {
  switch (m) {
    case FsmPhase::Approach: return "approach";
    case FsmPhase::Wait: return "wait";
    case FsmPhase::Move: return "move";
    case FsmPhase::Done: return "done";
  }
  return "approach";
}

inline FsmPhase parse_fsm_phase(const std::string& s) {
  if (s == "approach") return FsmPhase::Approach;
  if (s == "wait") return FsmPhase::Wait;
  if (s == "move") return FsmPhase::Move;
  if (s == "done") return FsmPhase::Done;
  throw std::runtime_error("trajectory: unknown mode '" + s + "'");
}

namespace detail {

inline std::string format_precise(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace detail

inline TrajectoryLog make_trajectory_log(const Scenario& sc,
                                         const EpisodeResult& ep) {
  TrajectoryLog log;
  log.name = sc.name;
  log.map_kind = sc.map_kind;
  log.lane_width = sc.lane_width;
  log.destination = sc.destination;
  log.decision_point = sc.decision_point;
  log.fov_radius = sc.escooter_params.fov_radius;
  log.fov_angle = sc.escooter_params.fov_angle;
  log.body_radius = sc.escooter_params.body_radius;
  for (const VehicleAgent& a : sc.vehicles) log.vehicle_specs.push_back(a.spec);
  log.steps = ep.trajectory;
  return log;
}

inline std::string trajectory_csv(const TrajectoryLog& log) {
  using detail::format_precise;
  std::string out = "# veisim-trajectory v1\n";
  out += "# name=" + log.name + "\n";
  out += std::string("# map=") + map_kind_name(log.map_kind) + "\n";
  out += "# lane_width=" + format_precise(log.lane_width) + "\n";
  out += "# destination=" + format_precise(log.destination.x) + "," +
         format_precise(log.destination.y) + "\n";
  out += "# decision_point=" + format_precise(log.decision_point.x) + "," +
         format_precise(log.decision_point.y) + "\n";
  out += "# fov_radius=" + format_precise(log.fov_radius) + "\n";
  out += "# fov_angle=" + format_precise(log.fov_angle) + "\n";
  out += "# body_radius=" + format_precise(log.body_radius) + "\n";
  for (const VehicleSpec& spec : log.vehicle_specs) {
    out += std::string("# vehicle=role:") + detail::role_name(spec.role) +
           ",hazard:" + (spec.hazard ? "1" : "0") +
           ",length:" + format_precise(spec.length) +
           ",width:" + format_precise(spec.width) + "\n";
  }
  out += "t,esc_x,esc_y,esc_vx,esc_vy,esc_mode";
  for (size_t i = 0; i < log.vehicle_specs.size(); ++i) {
    const std::string v = "veh" + std::to_string(i);
    out += "," + v + "_x," + v + "_y," + v + "_psi," + v + "_v";
  }
  out += "\n";
  for (const TrajectoryStep& step : log.steps) {
    out += format_precise(step.t);
    out += ',';
    out += format_precise(step.escooter.pos.x);
    out += ',';
    out += format_precise(step.escooter.pos.y);
    out += ',';
    out += format_precise(step.escooter.vel.x);
    out += ',';
    out += format_precise(step.escooter.vel.y);
    out += ',';
    out += fsm_phase_name(step.escooter.mode.phase);
    for (const VehicleState& v : step.vehicles) {
      out += ',';
      out += format_precise(v.x);
      out += ',';
      out += format_precise(v.y);
      out += ',';
      out += format_precise(v.psi);
      out += ',';
      out += format_precise(v.v);
    }
    out += '\n';
  }
  return out;
}

inline void write_trajectory_csv(const TrajectoryLog& log,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  out << trajectory_csv(log);
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline double parse_double(const std::string& s, const std::string& ctx) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(ctx + ": bad number '" + s + "'");
  }
}

inline Vec2 parse_vec2(const std::string& s, const std::string& ctx) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw std::runtime_error(ctx + ": expected x,y");
  return {parse_double(parts[0], ctx), parse_double(parts[1], ctx)};
}

}  // namespace detail

inline TrajectoryLog parse_trajectory_csv(std::istream& in) {
  using detail::parse_double;
  TrajectoryLog log;
  std::string line;
  bool versioned = false;
  bool header_seen = false;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = "trajectory line " + std::to_string(line_no);
    if (line[0] == '#') {
      std::string meta = line.substr(1);
      while (!meta.empty() && meta.front() == ' ') meta.erase(meta.begin());
      if (meta == "veisim-trajectory v1") {
        versioned = true;
        continue;
      }
      const size_t eq = meta.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error(ctx + ": malformed metadata");
      }
      const std::string key = meta.substr(0, eq);
      const std::string value = meta.substr(eq + 1);
      if (key == "name") {
        log.name = value;
      } else if (key == "map") {
        if (value == "intersection") {
          log.map_kind = MapKind::Intersection;
        } else if (value == "straight_road") {
          log.map_kind = MapKind::StraightRoad;
        } else {
          throw std::runtime_error(ctx + ": unknown map '" + value + "'");
        }
      } else if (key == "lane_width") {
        log.lane_width = parse_double(value, ctx);
      } else if (key == "destination") {
        log.destination = detail::parse_vec2(value, ctx);
      } else if (key == "decision_point") {
        log.decision_point = detail::parse_vec2(value, ctx);
      } else if (key == "fov_radius") {
        log.fov_radius = parse_double(value, ctx);
      } else if (key == "fov_angle") {
        log.fov_angle = parse_double(value, ctx);
      } else if (key == "body_radius") {
        log.body_radius = parse_double(value, ctx);
      } else if (key == "vehicle") {
        VehicleSpec spec;
        for (const std::string& field : detail::split(value, ',')) {
          const size_t colon = field.find(':');
          if (colon == std::string::npos) {
            throw std::runtime_error(ctx + ": malformed vehicle field");
          }
          const std::string fk = field.substr(0, colon);
          const std::string fv = field.substr(colon + 1);
          if (fk == "role") {
            spec.role = detail::parse_role(fv, ctx);
            if (spec.role == VehicleRole::Crossing ||
                spec.role == VehicleRole::Passing) {
              spec.hazard = true;
            }
          } else if (fk == "hazard") {
            spec.hazard = fv == "1";
          } else if (fk == "length") {
            spec.length = parse_double(fv, ctx);
          } else if (fk == "width") {
            spec.width = parse_double(fv, ctx);
          } else {
            throw std::runtime_error(ctx + ": unknown vehicle field '" + fk +
                                     "'");
          }
        }
        log.vehicle_specs.push_back(spec);
      } else {
        throw std::runtime_error(ctx + ": unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    const auto parts = detail::split(line, ',');
    const size_t expected = 6 + 4 * log.vehicle_specs.size();
    if (parts.size() != expected) {
      throw std::runtime_error(ctx + ": expected " + std::to_string(expected) +
                               " columns, got " + std::to_string(parts.size()));
    }
    TrajectoryStep step;
    step.t = parse_double(parts[0], ctx);
    step.escooter.pos = {parse_double(parts[1], ctx), parse_double(parts[2], ctx)};
    step.escooter.vel = {parse_double(parts[3], ctx), parse_double(parts[4], ctx)};
    step.escooter.mode.phase = parse_fsm_phase(parts[5]);
    step.escooter.mode.decided = step.escooter.mode.phase != FsmPhase::Approach;
    for (size_t i = 0; i < log.vehicle_specs.size(); ++i) {
      VehicleState v;
      v.x = parse_double(parts[6 + 4 * i], ctx);
      v.y = parse_double(parts[7 + 4 * i], ctx);
      v.psi = parse_double(parts[8 + 4 * i], ctx);
      v.v = parse_double(parts[9 + 4 * i], ctx);
      step.vehicles.push_back(v);
    }
    log.steps.push_back(std::move(step));
  }
  if (!versioned) {
    throw std::runtime_error("trajectory: missing '# veisim-trajectory v1' marker");
  }
  return log;
}

inline TrajectoryLog load_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory: " + path);
  return parse_trajectory_csv(in);
}

}  // namespace veisim
