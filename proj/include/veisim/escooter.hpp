#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "veisim/geometry.hpp"

namespace veisim {

// Crossing / lane-change planner phases. Wait is absorbing within an episode;
// the only legal transitions are Approach->{Wait|Move} and Move->Done.
enum class FsmPhase { Approach, Wait, Move, Done };

struct FsmMode {
  FsmPhase phase{FsmPhase::Approach};
  bool decided{false};  // latched once the gap test has run

  constexpr bool operator==(const FsmMode&) const = default;
};

enum class BehaviorType { Aggressive, Normal };

struct EscooterState {
  Vec2 pos;      // m
  Vec2 vel;      // m/s, |vel| <= v_max
  FsmMode mode;

  constexpr bool operator==(const EscooterState&) const = default;
};

struct EscooterParams {
  double mass{90.0};                // kg, rider + scooter
  double k_des{60.0};               // kg/s
  double v0{100.0};                 // m^2/s, speed scale of the desired-velocity law
  double sigma_des{1.0};            // m
  double a_veh{2000.0};             // N, repulsion amplitude
  double b_veh{3.0};                // 1/m, repulsion decay
  double fov_radius{10.0};          // m
  double fov_angle{120.0};          // degrees, full opening
  double crossing_threshold{25.0};  // m
  double v_max{5.0};                // m/s
  double body_radius{0.4};          // m

  constexpr bool operator==(const EscooterParams&) const = default;
};

inline double default_crossing_threshold(BehaviorType b) {
  return b == BehaviorType::Aggressive ? 25.0 : 200.0;
}

// Desired velocity toward the destination, v0 * d / (|d|^2 + sigma^2) with the
// magnitude clamped to v_max. The unclamped magnitude peaks at v0 / (2 sigma)
// when |d| = sigma.
inline Vec2 desired_velocity(Vec2 s_esc, Vec2 s_des, double v0,
                             double sigma_des, double v_max) {
  const Vec2 d = s_des - s_esc;
  Vec2 v = v0 / (d.norm_sq() + sigma_des * sigma_des) * d;
  const double mag = v.norm();
  if (mag > v_max) v = v * (v_max / mag);
  return v;
}

inline Vec2 destination_force(Vec2 v_des, Vec2 v_esc, double k_des) {
  return k_des * (v_des - v_esc);
}

struct RepulsionResult {
  Vec2 force;
  // Set when an influence point coincides with the e-scooter position; that
  // term has no direction and is skipped.
  bool degenerate_contact{false};
};

// Sum of A * exp(-b * d_i) * n_i over influence points, n_i pointing from the
// point toward the e-scooter.
inline RepulsionResult vehicle_repulsion(Vec2 s_esc,
                                         std::span<const Vec2> influence_points,
                                         double a_veh, double b_veh) {
  RepulsionResult r;
  for (Vec2 p : influence_points) {
    const Vec2 d = s_esc - p;
    const double dist = d.norm();
    if (dist == 0.0) {
      r.degenerate_contact = true;
      continue;
    }
    r.force += (a_veh * std::exp(-b_veh * dist) / dist) * d;
  }
  return r;
}

inline Vec2 total_force(Vec2 f_des, Vec2 f_rep) { return f_des + f_rep; }

// Facing direction of the FOV sector: the velocity direction while moving,
// otherwise toward the current planner target (decision point while
// approaching, destination afterwards); +x when the target coincides with the
// position.
inline Vec2 fov_heading(const EscooterState& state, Vec2 target) {
  const double speed = state.vel.norm();
  if (speed > 0.1) return state.vel / speed;
  const Vec2 to_target = target - state.pos;
  const double d = to_target.norm();
  if (d > 0.0) return to_target / d;
  return {1.0, 0.0};
}

// Influence points of every vehicle footprint overlapping the FOV sector.
inline std::vector<Vec2> perceive(const EscooterState& state,
                                  const EscooterParams& params,
                                  std::span<const OrientedRect> vehicles,
                                  Vec2 target) {
  const Vec2 facing = fov_heading(state, target);
  const Sector fov{state.pos, std::atan2(facing.y, facing.x), params.fov_radius,
                   params.fov_angle * std::numbers::pi / 180.0 / 2.0};
  std::vector<Vec2> points;
  for (const OrientedRect& v : vehicles) {
    if (sector_contains_rect(fov, v)) {
      points.push_back(closest_point_on_rect(state.pos, v));
    }
  }
  return points;
}

// Planner transition function. The gap test runs exactly once, on first
// arrival at the decision point; Wait is absorbing.
inline FsmMode fsm_step(FsmMode mode, double gap, double threshold,
                        bool at_decision_point, bool at_destination) {
  if (mode.phase == FsmPhase::Approach && at_decision_point && !mode.decided) {
    mode.decided = true;
    mode.phase = gap >= threshold ? FsmPhase::Move : FsmPhase::Wait;
  } else if (mode.phase == FsmPhase::Move && at_destination) {
    mode.phase = FsmPhase::Done;
  }
  return mode;
}

// Semi-implicit Euler: velocity first, then position with the new velocity.
// Wait and Done pin the e-scooter in place.
inline EscooterState integrate_escooter(const EscooterState& state,
                                        Vec2 f_total, double mass, double dt,
                                        double v_max) {
  EscooterState next = state;
  if (state.mode.phase == FsmPhase::Wait || state.mode.phase == FsmPhase::Done) {
    next.vel = {0.0, 0.0};
    return next;
  }
  next.vel = state.vel + (dt / mass) * f_total;
  const double speed = next.vel.norm();
  if (speed > v_max) next.vel = next.vel * (v_max / speed);
  next.pos = state.pos + dt * next.vel;
  return next;
}

}  // namespace veisim
