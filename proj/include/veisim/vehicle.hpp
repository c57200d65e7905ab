#pragma once

#include <cmath>
#include <stdexcept>

#include "veisim/geometry.hpp"

namespace veisim {

// Kinematic bicycle state [x, y, psi, v].
struct VehicleState {
  double x{0.0};    // m
  double y{0.0};    // m
  double psi{0.0};  // heading, radians, normalized to (-pi, pi]
  double v{0.0};    // m/s, >= 0

  constexpr bool operator==(const VehicleState&) const = default;
};

enum class VehicleRole { Parked, Follower, Crossing, Passing };

struct VehicleSpec {
  double length{4.6};
  double width{1.8};
  double lf{1.25};  // front axle to center of gravity
  double lr{1.25};  // rear axle to center of gravity
  bool hazard{false};
  VehicleRole role{VehicleRole::Parked};

  constexpr bool operator==(const VehicleSpec&) const = default;
};

struct ControlInput {
  double accel{0.0};  // m/s^2
  double steer{0.0};  // radians
};

// One explicit Euler step of the kinematic bicycle:
//   beta = atan(lr / (lf + lr) * tan(steer))
//   dx = v cos(psi + beta), dy = v sin(psi + beta)
//   dpsi = v / lr * sin(beta), dv = accel
inline VehicleState bicycle_step(const VehicleState& s, double accel,
                                 double steer, double lf, double lr,
                                 double dt) {
  if (!(std::abs(steer) < std::numbers::pi / 2.0)) {
    throw std::invalid_argument("bicycle_step: |steer| must be < pi/2");
  }
  const double beta = std::atan(lr / (lf + lr) * std::tan(steer));
  VehicleState next = s;
  next.x = s.x + s.v * std::cos(s.psi + beta) * dt;
  next.y = s.y + s.v * std::sin(s.psi + beta) * dt;
  next.psi = normalize_angle(s.psi + s.v / lr * std::sin(beta) * dt);
  next.v = s.v + accel * dt;
  return next;
}

// All scenario vehicles follow their pre-defined trajectory at constant speed.
inline ControlInput constant_speed_controller(const VehicleState&) {
  return {0.0, 0.0};
}

inline OrientedRect footprint(const VehicleState& s, const VehicleSpec& spec) {
  return {{s.x, s.y}, s.psi, spec.length, spec.width};
}

}  // namespace veisim
