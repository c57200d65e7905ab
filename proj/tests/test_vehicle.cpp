#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "veisim/vehicle.hpp"

using namespace veisim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("bicycle_step straight-line limit") {
  const VehicleState s{0.0, 0.0, 0.0, 10.0};
  const VehicleState next = bicycle_step(s, 0.0, 0.0, 1.25, 1.25, 0.1);
  CHECK(next.x == 1.0);
  CHECK(next.y == 0.0);
  CHECK(next.psi == 0.0);
  CHECK(next.v == 10.0);
}

TEST_CASE("bicycle_step single-step hand evaluation") {
  const double lf = 1.25;
  const double lr = 1.25;
  const double dt = 0.1;
  const VehicleState s{0.0, 0.0, 0.0, 10.0};
  const VehicleState next = bicycle_step(s, 0.0, 0.1, lf, lr, dt);

  const double beta = std::atan(lr / (lf + lr) * std::tan(0.1));
  CHECK_THAT(beta, WithinAbs(0.050125, 1e-6));
  CHECK_THAT(next.x, WithinRel(10.0 * std::cos(beta) * dt, 1e-15));
  CHECK_THAT(next.y, WithinRel(10.0 * std::sin(beta) * dt, 1e-15));
  CHECK_THAT(next.psi, WithinRel(10.0 / lr * std::sin(beta) * dt, 1e-15));

  CHECK_THAT(next.x, WithinAbs(0.99874, 1e-5));
  CHECK_THAT(next.y, WithinAbs(0.050104, 1e-6));
  CHECK_THAT(next.psi, WithinAbs(0.0400836, 1e-6));
  CHECK(next.v == 10.0);
}

TEST_CASE("bicycle_step at rest only integrates acceleration") {
  const VehicleState s{1.0, 2.0, 0.3, 0.0};
  const VehicleState coasting = bicycle_step(s, 0.0, 0.4, 1.25, 1.25, 0.1);
  CHECK(coasting == s);
  const VehicleState accelerating = bicycle_step(s, 2.0, 0.4, 1.25, 1.25, 0.1);
  CHECK(accelerating.x == s.x);
  CHECK(accelerating.y == s.y);
  CHECK(accelerating.psi == s.psi);
  CHECK_THAT(accelerating.v, WithinRel(0.2, 1e-15));
}

TEST_CASE("bicycle_step rejects steering at or beyond pi/2") {
  const VehicleState s{0.0, 0.0, 0.0, 5.0};
  CHECK_THROWS_AS(bicycle_step(s, 0.0, kPi / 2.0, 1.25, 1.25, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bicycle_step(s, 0.0, -kPi / 2.0, 1.25, 1.25, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_WITH(bicycle_step(s, 0.0, 2.0, 1.25, 1.25, 0.1),
                    Catch::Matchers::ContainsSubstring("steer"));
  CHECK_NOTHROW(bicycle_step(s, 0.0, kPi / 2.0 - 0.01, 1.25, 1.25, 0.1));
}

TEST_CASE("zero steering keeps the trajectory exactly linear") {
  VehicleState s{-3.0, 7.0, 0.0, 12.5};
  for (int i = 0; i < 1000; ++i) {
    s = bicycle_step(s, 0.0, 0.0, 1.25, 1.25, 0.1);
    REQUIRE(s.y == 7.0);
    REQUIRE(s.psi == 0.0);
    REQUIRE(s.v == 12.5);
  }
  CHECK_THAT(s.x, WithinRel(-3.0 + 12.5 * 0.1 * 1000.0, 1e-12));
}

TEST_CASE("speed is conserved exactly without acceleration") {
  std::mt19937 rng{42u};
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  std::uniform_real_distribution<double> speed(0.5, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double v0 = speed(rng);
    VehicleState s{0.0, 0.0, ang(rng), v0};
    for (int i = 0; i < 50; ++i) {
      s = bicycle_step(s, 0.0, ang(rng), 1.25, 1.25, 0.1);
      REQUIRE(s.v == v0);
    }
  }
}

TEST_CASE("halving dt shrinks the splitting error quadratically") {
  std::mt19937 rng{7u};
  std::uniform_real_distribution<double> ang(-1.0, 1.0);
  std::uniform_real_distribution<double> speed(1.0, 15.0);
  std::uniform_real_distribution<double> accel(-2.0, 2.0);

  auto split_error = [](const VehicleState& s, double a, double steer,
                        double dt) {
    const VehicleState one = bicycle_step(s, a, steer, 1.25, 1.25, dt);
    const VehicleState half = bicycle_step(s, a, steer, 1.25, 1.25, dt / 2.0);
    const VehicleState two = bicycle_step(half, a, steer, 1.25, 1.25, dt / 2.0);
    return std::hypot(one.x - two.x, one.y - two.y) +
           std::abs(one.psi - two.psi);
  };

  for (int trial = 0; trial < 100; ++trial) {
    const VehicleState s{0.0, 0.0, ang(rng), speed(rng)};
    const double a = accel(rng);
    const double steer = ang(rng) * 0.8;
    const double e1 = split_error(s, a, steer, 0.2);
    const double e2 = split_error(s, a, steer, 0.1);
    if (e1 < 1e-10) continue;  // nearly straight; both errors are FP noise
    // First-order Euler: the splitting defect scales as dt^2, so halving dt
    // divides it by about 4. Allow generous slack for the O(dt^3) tail.
    REQUIRE(e2 <= 0.35 * e1);
  }
}

TEST_CASE("constant_speed_controller always coasts") {
  CHECK(constant_speed_controller({0.0, 0.0, 0.0, 0.0}).accel == 0.0);
  CHECK(constant_speed_controller({5.0, -3.0, 1.0, 10.0}).steer == 0.0);

  VehicleState crossing{-75.0, -2.0, 0.0, 10.0};
  for (int i = 0; i < 300; ++i) {
    const ControlInput u = constant_speed_controller(crossing);
    crossing = bicycle_step(crossing, u.accel, u.steer, 1.25, 1.25, 0.1);
    REQUIRE(crossing.v == 10.0);
  }
  CHECK_THAT(crossing.x, WithinRel(-75.0 + 300.0, 1e-12));
}

TEST_CASE("footprint follows pose and spec") {
  const VehicleSpec spec{};
  const OrientedRect parked = footprint({6.0, -12.0, kPi / 2.0, 0.0}, spec);
  CHECK(parked.center == Vec2{6.0, -12.0});
  CHECK(parked.heading == kPi / 2.0);
  CHECK(parked.length == 4.6);
  CHECK(parked.width == 1.8);
  // Long axis along y after the 90-degree heading: the rect reaches further
  // in y than in x.
  CHECK(point_in_rect({6.0, -12.0 + 2.2}, parked));
  CHECK_FALSE(point_in_rect({6.0 + 2.2, -12.0}, parked));

  const OrientedRect origin = footprint({0.0, 0.0, 0.0, 0.0}, spec);
  CHECK(point_in_rect({2.3, 0.9}, origin));
  CHECK(point_in_rect({-2.3, -0.9}, origin));
  CHECK_FALSE(point_in_rect({2.31, 0.9}, origin));
  CHECK_FALSE(point_in_rect({2.3, 0.91}, origin));
}
