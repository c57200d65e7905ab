#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "veisim/escooter.hpp"
#include "veisim/geometry.hpp"
#include "veisim/vehicle.hpp"

namespace veisim {

enum class MapKind { Intersection, StraightRoad };

enum class Outcome { Collision, ReachedDestination, Timeout };

struct VehicleAgent {
  VehicleState state;
  VehicleSpec spec;

  constexpr bool operator==(const VehicleAgent&) const = default;
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;  // use-case identifier carried into result rows
  MapKind map_kind{MapKind::Intersection};
  double lane_width{4.0};
  std::vector<VehicleAgent> vehicles;
  Vec2 escooter_init;
  Vec2 destination;
  Vec2 decision_point;
  EscooterParams escooter_params;
  BehaviorType behavior{BehaviorType::Aggressive};
  double t_max{30.0};
  double dt{0.1};

  bool operator==(const Scenario&) const = default;
};

// Arrival tolerance around both the decision point and the destination.
inline constexpr double kArrivalTolerance = 0.5;

namespace detail {

inline bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace detail

// Throws ScenarioError naming the offending field when an invariant fails.
inline void validate(const Scenario& sc) {
  auto fail = [](const std::string& what) { throw ScenarioError(what); };
  if (!(sc.dt > 0.0)) fail("dt: must be > 0");
  if (!(sc.t_max >= sc.dt)) fail("t_max: must be >= dt");
  if (!(sc.lane_width > 0.0)) fail("lane_width: must be > 0");
  if (sc.vehicles.empty()) fail("vehicles: at least one vehicle");
  if (!detail::finite(sc.escooter_init)) fail("escooter.init: must be finite");
  if (!detail::finite(sc.destination)) fail("escooter.destination: must be finite");
  if (!detail::finite(sc.decision_point)) fail("escooter.decision_point: must be finite");
  // The decision point must lie between init and destination: its projection
  // onto the init->destination segment stays within the segment.
  {
    const Vec2 seg = sc.destination - sc.escooter_init;
    if ((sc.decision_point - sc.escooter_init).dot(seg) < 0.0 ||
        (sc.decision_point - sc.destination).dot(-seg) < 0.0) {
      fail("escooter.decision_point: must lie between init and destination");
    }
  }
  const EscooterParams& p = sc.escooter_params;
  if (!(p.mass > 0.0)) fail("params.mass: must be > 0");
  if (!(p.k_des > 0.0)) fail("params.k_des: must be > 0");
  if (!(p.v0 > 0.0)) fail("params.v0: must be > 0");
  if (!(p.sigma_des > 0.0)) fail("params.sigma_des: must be > 0");
  if (!(p.a_veh > 0.0)) fail("params.a_veh: must be > 0");
  if (!(p.b_veh > 0.0)) fail("params.b_veh: must be > 0");
  if (!(p.fov_radius > 0.0)) fail("params.fov_radius: must be > 0");
  if (!(p.fov_angle > 0.0 && p.fov_angle <= 360.0)) {
    fail("params.fov_angle: must be in (0, 360]");
  }
  if (!(p.crossing_threshold > 0.0)) fail("params.crossing_threshold: must be > 0");
  if (!(p.v_max > 0.0)) fail("params.v_max: must be > 0");
  if (!(p.body_radius > 0.0)) fail("params.body_radius: must be > 0");
  for (size_t i = 0; i < sc.vehicles.size(); ++i) {
    const VehicleAgent& a = sc.vehicles[i];
    const std::string key = "vehicles[" + std::to_string(i) + "]";
    if (!(a.spec.length > 0.0)) fail(key + ".length: must be > 0");
    if (!(a.spec.width > 0.0)) fail(key + ".width: must be > 0");
    if (!(a.spec.lf > 0.0 && a.spec.lr > 0.0)) {
      fail(key + ".lf/lr: must be > 0");
    }
    if (!(a.spec.length > a.spec.lf + a.spec.lr)) {
      fail(key + ".length: must exceed lf + lr");
    }
    if (!(a.state.v >= 0.0)) fail(key + ".speed: must be >= 0");
    if (!std::isfinite(a.state.x) || !std::isfinite(a.state.y)) {
      fail(key + ".position: must be finite");
    }
  }
}

inline bool detect_collision(const EscooterState& esc, double body_radius,
                             std::span<const OrientedRect> vehicles) {
  for (const OrientedRect& r : vehicles) {
    if (point_in_rect(esc.pos, r, body_radius)) return true;
  }
  return false;
}

// Minimum distance from the e-scooter to any hazard-flagged vehicle;
// +infinity when the scenario has no hazards (the gap test always passes).
inline double gap_distance(Vec2 esc_pos, std::span<const VehicleAgent> vehicles) {
  double gap = std::numeric_limits<double>::infinity();
  for (const VehicleAgent& a : vehicles) {
    if (!a.spec.hazard) continue;
    const Vec2 q = closest_point_on_rect(esc_pos, footprint(a.state, a.spec));
    gap = std::min(gap, distance(esc_pos, q));
  }
  return gap;
}

struct TrajectoryStep {
  double t{0.0};
  EscooterState escooter;
  std::vector<VehicleState> vehicles;

  bool operator==(const TrajectoryStep&) const = default;
};

struct EpisodeResult {
  Outcome outcome{Outcome::Timeout};
  double t_event{0.0};
  double min_separation{std::numeric_limits<double>::infinity()};
  std::vector<TrajectoryStep> trajectory;
  // Gap measured by the (single) latched decision; NaN when the e-scooter
  // never reached the decision point.
  double decision_time{-1.0};
  double decision_gap{std::numeric_limits<double>::quiet_NaN()};
};

// Runs one episode to completion. Tick order: vehicles step first, then the
// e-scooter perceives, accumulates forces, runs the planner, integrates, and
// finally collision / arrival / timeout are checked, in that order.
inline EpisodeResult run_episode(const Scenario& sc) {
  validate(sc);

  const EscooterParams& p = sc.escooter_params;
  std::vector<VehicleAgent> vehicles = sc.vehicles;
  EscooterState esc{sc.escooter_init, {0.0, 0.0}, {}};

  EpisodeResult result;
  const int n_steps = static_cast<int>(std::lround(sc.t_max / sc.dt));

  std::vector<OrientedRect> rects(vehicles.size());
  auto refresh_rects = [&] {
    for (size_t i = 0; i < vehicles.size(); ++i) {
      rects[i] = footprint(vehicles[i].state, vehicles[i].spec);
    }
  };
  auto separation = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (const OrientedRect& r : rects) {
      m = std::min(m, distance(esc.pos, closest_point_on_rect(esc.pos, r)));
    }
    return m;
  };
  auto vehicle_states = [&] {
    std::vector<VehicleState> out;
    out.reserve(vehicles.size());
    for (const VehicleAgent& a : vehicles) out.push_back(a.state);
    return out;
  };
  auto finish = [&](Outcome outcome, double t) {
    result.outcome = outcome;
    result.t_event = t;
    return result;
  };

  refresh_rects();
  result.min_separation = std::min(result.min_separation, separation());
  result.trajectory.push_back({0.0, esc, vehicle_states()});
  if (detect_collision(esc, p.body_radius, rects)) {
    return finish(Outcome::Collision, 0.0);
  }
  if (distance(esc.pos, sc.destination) <= kArrivalTolerance) {
    return finish(Outcome::ReachedDestination, 0.0);
  }

  for (int k = 1; k <= n_steps; ++k) {
    const double t = k * sc.dt;

    // 1. vehicles follow their pre-defined constant-speed trajectories
    for (VehicleAgent& a : vehicles) {
      if (a.state.v > 0.0) {
        const ControlInput u = constant_speed_controller(a.state);
        a.state = bicycle_step(a.state, u.accel, u.steer, a.spec.lf, a.spec.lr,
                               sc.dt);
      }
    }
    refresh_rects();

    // 2. perception against current-tick vehicle poses
    const Vec2 target =
        esc.mode.phase == FsmPhase::Approach ? sc.decision_point : sc.destination;
    const std::vector<Vec2> influence = perceive(esc, p, rects, target);

    // 3. social forces toward the current planner target
    const Vec2 v_des =
        desired_velocity(esc.pos, target, p.v0, p.sigma_des, p.v_max);
    const Vec2 f_des = destination_force(v_des, esc.vel, p.k_des);
    const Vec2 f_rep = vehicle_repulsion(esc.pos, influence, p.a_veh, p.b_veh).force;
    const Vec2 f_total = total_force(f_des, f_rep);

    // 4. planner transition on pre-integration position
    const bool at_dp = distance(esc.pos, sc.decision_point) <= kArrivalTolerance;
    const bool at_dest = distance(esc.pos, sc.destination) <= kArrivalTolerance;
    const double gap = gap_distance(esc.pos, vehicles);
    const bool decides = esc.mode.phase == FsmPhase::Approach && at_dp &&
                         !esc.mode.decided;
    esc.mode = fsm_step(esc.mode, gap, p.crossing_threshold, at_dp, at_dest);
    if (decides) {
      result.decision_time = t;
      result.decision_gap = gap;
    }

    // 5. integrate the e-scooter
    esc = integrate_escooter(esc, f_total, p.mass, sc.dt, p.v_max);

    // 6. bookkeeping and termination checks
    result.min_separation = std::min(result.min_separation, separation());
    if (detect_collision(esc, p.body_radius, rects)) {
      result.trajectory.push_back({t, esc, vehicle_states()});
      return finish(Outcome::Collision, t);
    }
    if (distance(esc.pos, sc.destination) <= kArrivalTolerance) {
      esc.mode = fsm_step(esc.mode, gap, p.crossing_threshold, false, true);
      result.trajectory.push_back({t, esc, vehicle_states()});
      return finish(Outcome::ReachedDestination, t);
    }
    result.trajectory.push_back({t, esc, vehicle_states()});
  }
  return finish(Outcome::Timeout, n_steps * sc.dt);
}

}  // namespace veisim
