#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "veisim/escooter.hpp"
#include "veisim/vehicle.hpp"

using namespace veisim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("desired_velocity vanishes at the destination") {
  const Vec2 v = desired_velocity({3.0, -2.0}, {3.0, -2.0}, 100.0, 1.0, 5.0);
  CHECK(v == Vec2{0.0, 0.0});
}

TEST_CASE("desired_velocity direct evaluation") {
  const Vec2 v = desired_velocity({0.0, 0.0}, {4.0, 3.0}, 3.0, 1.0, kInf);
  CHECK_THAT(v.x, WithinRel(12.0 / 26.0, 1e-12));
  CHECK_THAT(v.y, WithinRel(9.0 / 26.0, 1e-12));
  CHECK_THAT(v.x, WithinAbs(0.4615, 1e-4));
  CHECK_THAT(v.y, WithinAbs(0.3462, 1e-4));
}

TEST_CASE("desired_velocity clamps its magnitude and keeps direction") {
  const Vec2 v = desired_velocity({0.0, 0.0}, {10.0, 0.0}, 100.0, 1.0, 5.0);
  CHECK_THAT(v.x, WithinRel(5.0, 1e-12));
  CHECK(v.y == 0.0);
  // Unclamped magnitude would be 100*10/101.
  const Vec2 u = desired_velocity({0.0, 0.0}, {10.0, 0.0}, 100.0, 1.0, kInf);
  CHECK_THAT(u.x, WithinRel(1000.0 / 101.0, 1e-12));
}

TEST_CASE("desired_velocity speed bound and alignment") {
  std::mt19937 rng{900u};
  std::uniform_real_distribution<double> coord(-80.0, 80.0);
  std::uniform_real_distribution<double> v0_dist(1.0, 200.0);
  std::uniform_real_distribution<double> sigma_dist(0.2, 5.0);
  std::uniform_real_distribution<double> vmax_dist(0.5, 20.0);

  for (int i = 0; i < 10000; ++i) {
    const Vec2 esc{coord(rng), coord(rng)};
    const Vec2 des{coord(rng), coord(rng)};
    const double v0 = v0_dist(rng);
    const double sigma = sigma_dist(rng);
    const double v_max = vmax_dist(rng);
    const Vec2 v = desired_velocity(esc, des, v0, sigma, v_max);

    const double bound = std::min(v_max, v0 / (2.0 * sigma));
    REQUIRE(v.norm() <= bound * (1.0 + 1e-12));

    // Parallel to the displacement with non-negative scale.
    const Vec2 d = des - esc;
    REQUIRE(std::abs(v.x * d.y - v.y * d.x) <= 1e-9 * (1.0 + d.norm()));
    REQUIRE(v.dot(d) >= 0.0);
  }
}

TEST_CASE("destination_force scales the velocity difference") {
  CHECK(destination_force({2.0, -1.0}, {2.0, -1.0}, 60.0) == Vec2{0.0, 0.0});
  CHECK(destination_force({1.0, 0.0}, {0.0, 0.0}, 2.0) == Vec2{2.0, 0.0});
  CHECK(destination_force({0.0, 0.0}, {1.0, 1.0}, 2.0) == Vec2{-2.0, -2.0});
}

TEST_CASE("vehicle_repulsion of a single influence point") {
  CHECK(vehicle_repulsion({0.0, 0.0}, {}, 5.0, 0.5).force == Vec2{0.0, 0.0});
  CHECK_FALSE(vehicle_repulsion({0.0, 0.0}, {}, 5.0, 0.5).degenerate_contact);

  const std::vector<Vec2> pts{{-2.0, 0.0}};
  const RepulsionResult r = vehicle_repulsion({0.0, 0.0}, pts, 5.0, 0.5);
  CHECK_THAT(r.force.x, WithinRel(5.0 * std::exp(-1.0), 1e-12));
  CHECK_THAT(r.force.x, WithinAbs(1.8394, 1e-4));
  CHECK_THAT(r.force.y, WithinAbs(0.0, 1e-15));
  CHECK_FALSE(r.degenerate_contact);
}

TEST_CASE("vehicle_repulsion superposes terms") {
  const std::vector<Vec2> pts{{-2.0, 0.0}, {0.0, -2.0}};
  const Vec2 f = vehicle_repulsion({0.0, 0.0}, pts, 5.0, 0.5).force;
  CHECK_THAT(f.x, WithinRel(5.0 * std::exp(-1.0), 1e-12));
  CHECK_THAT(f.y, WithinRel(5.0 * std::exp(-1.0), 1e-12));
}

TEST_CASE("vehicle_repulsion skips coincident points and flags them") {
  const std::vector<Vec2> pts{{1.0, 1.0}, {-2.0, 0.0}};
  const RepulsionResult r = vehicle_repulsion({1.0, 1.0}, pts, 5.0, 0.5);
  CHECK(r.degenerate_contact);
  const Vec2 expected =
      vehicle_repulsion({1.0, 1.0}, std::vector<Vec2>{{-2.0, 0.0}}, 5.0, 0.5)
          .force;
  CHECK(r.force == expected);
}

TEST_CASE("vehicle_repulsion decays with distance and pushes away") {
  std::mt19937 rng{31u};
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> dist(0.1, 20.0);

  for (int i = 0; i < 2000; ++i) {
    const double a = ang(rng);
    const Vec2 dir{std::cos(a), std::sin(a)};
    const double d1 = dist(rng);
    const double d2 = dist(rng);
    const Vec2 esc{3.0, -4.0};
    const double m1 =
        vehicle_repulsion(esc, std::vector<Vec2>{esc - d1 * dir}, 300.0, 0.6)
            .force.norm();
    const double m2 =
        vehicle_repulsion(esc, std::vector<Vec2>{esc - d2 * dir}, 300.0, 0.6)
            .force.norm();
    if (std::abs(d1 - d2) > 1e-9) {
      if (d1 < d2) {
        REQUIRE(m1 > m2);
      } else {
        REQUIRE(m2 > m1);
      }
    }

    const Vec2 p = esc - d1 * dir;
    const Vec2 f = vehicle_repulsion(esc, std::vector<Vec2>{p}, 300.0, 0.6).force;
    REQUIRE((esc - p).dot(f) >= 0.0);
  }
}

TEST_CASE("vehicle_repulsion equals the sum of single-point calls") {
  std::mt19937 rng{32u};
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_int_distribution<int> count(0, 5);

  for (int trial = 0; trial < 500; ++trial) {
    const Vec2 esc{coord(rng), coord(rng)};
    std::vector<Vec2> pts;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) pts.push_back({coord(rng), coord(rng)});

    const Vec2 together = vehicle_repulsion(esc, pts, 300.0, 0.6).force;
    Vec2 sum{0.0, 0.0};
    for (const Vec2& p : pts) {
      sum += vehicle_repulsion(esc, std::vector<Vec2>{p}, 300.0, 0.6).force;
    }
    REQUIRE_THAT(together.x, WithinAbs(sum.x, 1e-9));
    REQUIRE_THAT(together.y, WithinAbs(sum.y, 1e-9));
  }
}

TEST_CASE("total_force is the componentwise sum") {
  CHECK(total_force({1.0, 0.0}, {0.0, 0.0}) == Vec2{1.0, 0.0});
  const Vec2 f = total_force({0.92, 0.70}, {1.84, 0.0});
  CHECK_THAT(f.x, WithinAbs(2.76, 1e-12));
  CHECK_THAT(f.y, WithinAbs(0.70, 1e-12));
  CHECK(total_force({3.0, -2.0}, {-3.0, 2.0}) == Vec2{0.0, 0.0});
}

TEST_CASE("fsm_step decides once at the decision point") {
  const FsmMode approach{FsmPhase::Approach, false};

  const FsmMode crossed = fsm_step(approach, 79.1, 30.0, true, false);
  CHECK(crossed.phase == FsmPhase::Move);
  CHECK(crossed.decided);

  const FsmMode waiting = fsm_step(approach, 79.1, 200.0, true, false);
  CHECK(waiting.phase == FsmPhase::Wait);
  CHECK(waiting.decided);

  // Boundary: the gap test is >=.
  CHECK(fsm_step(approach, 30.0, 30.0, true, false).phase == FsmPhase::Move);
  CHECK(fsm_step(approach, 29.999, 30.0, true, false).phase == FsmPhase::Wait);
}

TEST_CASE("fsm_step keeps approaching away from the decision point") {
  const FsmMode approach{FsmPhase::Approach, false};
  const FsmMode unchanged = fsm_step(approach, 0.0, 30.0, false, false);
  CHECK(unchanged.phase == FsmPhase::Approach);
  CHECK_FALSE(unchanged.decided);
}

TEST_CASE("fsm_step terminal transitions") {
  const FsmMode moving{FsmPhase::Move, true};
  CHECK(fsm_step(moving, 0.0, 30.0, false, true).phase == FsmPhase::Done);
  CHECK(fsm_step(moving, 0.0, 30.0, false, false).phase == FsmPhase::Move);

  const FsmMode done{FsmPhase::Done, true};
  CHECK(fsm_step(done, kInf, 30.0, true, true).phase == FsmPhase::Done);
}

TEST_CASE("fsm_step wait is absorbing and the decision is latched") {
  FsmMode mode{FsmPhase::Approach, false};
  mode = fsm_step(mode, 10.0, 30.0, true, false);
  REQUIRE(mode.phase == FsmPhase::Wait);

  // A huge gap arriving later must not reopen the decision.
  mode = fsm_step(mode, 1e9, 30.0, true, false);
  CHECK(mode.phase == FsmPhase::Wait);
  mode = fsm_step(mode, kInf, 30.0, true, true);
  CHECK(mode.phase == FsmPhase::Wait);
}

TEST_CASE("fsm_step never moves after waiting across random traces") {
  std::mt19937 rng{55u};
  std::uniform_real_distribution<double> gap(0.0, 300.0);
  std::uniform_int_distribution<int> coin(0, 1);

  for (int trial = 0; trial < 500; ++trial) {
    FsmMode mode;
    bool waited = false;
    const double threshold = gap(rng) + 1.0;
    for (int step = 0; step < 100; ++step) {
      const FsmMode prev = mode;
      mode = fsm_step(mode, gap(rng), threshold, coin(rng) == 1,
                      coin(rng) == 1);
      if (prev.phase == FsmPhase::Wait) REQUIRE(mode.phase == FsmPhase::Wait);
      if (waited) REQUIRE(mode.phase != FsmPhase::Move);
      if (mode.phase == FsmPhase::Wait) waited = true;

      // Legal transition matrix.
      if (prev.phase == FsmPhase::Approach) {
        REQUIRE((mode.phase == FsmPhase::Approach ||
                 mode.phase == FsmPhase::Wait || mode.phase == FsmPhase::Move));
      } else if (prev.phase == FsmPhase::Move) {
        REQUIRE((mode.phase == FsmPhase::Move || mode.phase == FsmPhase::Done));
      } else {
        REQUIRE(mode.phase == prev.phase);
      }
    }
  }
}

TEST_CASE("integrate_escooter free motion") {
  const EscooterState s{{0.0, 0.0}, {1.0, 0.0}, {FsmPhase::Move, true}};
  const EscooterState next = integrate_escooter(s, {0.0, 0.0}, 90.0, 0.1, 5.0);
  CHECK(next.vel == Vec2{1.0, 0.0});
  CHECK_THAT(next.pos.x, WithinRel(0.1, 1e-15));
  CHECK(next.pos.y == 0.0);
}

TEST_CASE("integrate_escooter semi-implicit order") {
  const EscooterState s{{0.0, 0.0}, {0.0, 0.0}, {FsmPhase::Approach, false}};
  const EscooterState next = integrate_escooter(s, {90.0, 0.0}, 90.0, 0.1, 5.0);
  // a = f/m = 1; velocity updates first, position uses the new velocity.
  CHECK_THAT(next.vel.x, WithinRel(0.1, 1e-14));
  CHECK_THAT(next.pos.x, WithinRel(0.01, 1e-13));
  CHECK(next.vel.y == 0.0);
}

TEST_CASE("integrate_escooter clamps speed to v_max") {
  const EscooterState s{{0.0, 0.0}, {4.0, 3.0}, {FsmPhase::Move, true}};
  const EscooterState next =
      integrate_escooter(s, {9000.0, -4500.0}, 90.0, 0.1, 5.0);
  CHECK_THAT(next.vel.norm(), WithinRel(5.0, 1e-12));
}

TEST_CASE("integrate_escooter pins waiting and finished riders") {
  const EscooterState waiting{{2.0, 3.0}, {0.0, 0.0}, {FsmPhase::Wait, true}};
  CHECK(integrate_escooter(waiting, {500.0, 200.0}, 90.0, 0.1, 5.0) == waiting);

  const EscooterState rolling{{2.0, 3.0}, {1.5, 0.0}, {FsmPhase::Wait, true}};
  const EscooterState stopped =
      integrate_escooter(rolling, {0.0, 0.0}, 90.0, 0.1, 5.0);
  CHECK(stopped.pos == rolling.pos);
  CHECK(stopped.vel == Vec2{0.0, 0.0});

  const EscooterState done{{1.0, 1.0}, {0.0, 0.0}, {FsmPhase::Done, true}};
  CHECK(integrate_escooter(done, {-100.0, 40.0}, 90.0, 0.1, 5.0) == done);
}

TEST_CASE("integrate_escooter is deterministic") {
  const EscooterState s{{0.3, -0.7}, {1.1, 2.2}, {FsmPhase::Move, true}};
  const EscooterState a = integrate_escooter(s, {13.7, -2.9}, 90.0, 0.1, 5.0);
  const EscooterState b = integrate_escooter(s, {13.7, -2.9}, 90.0, 0.1, 5.0);
  CHECK(a == b);
}

TEST_CASE("fov_heading follows velocity, then the planner target") {
  const EscooterState moving{{0.0, 0.0}, {0.0, 2.0}, {}};
  const Vec2 hv = fov_heading(moving, {50.0, 0.0});
  CHECK_THAT(hv.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(hv.y, WithinAbs(1.0, 1e-15));

  // Below the 0.1 m/s moving cutoff the gaze turns toward the target.
  const EscooterState crawling{{0.0, 0.0}, {0.05, 0.0}, {}};
  const Vec2 ht = fov_heading(crawling, {0.0, -9.0});
  CHECK_THAT(ht.x, WithinAbs(0.0, 1e-15));
  CHECK_THAT(ht.y, WithinAbs(-1.0, 1e-15));

  // Degenerate: standing on the target.
  const EscooterState parked{{1.0, 1.0}, {0.0, 0.0}, {}};
  CHECK(fov_heading(parked, {1.0, 1.0}) == Vec2{1.0, 0.0});
}

TEST_CASE("perceive returns nothing without vehicles") {
  const EscooterState s{{4.0, -30.0}, {0.0, 0.0}, {}};
  CHECK(perceive(s, {}, {}, {4.0, -14.0}).empty());
}

TEST_CASE("perceive sees the parked intersection cars when in range") {
  // Intersection layout: parked cars at (6,-12) and (2,-16), both heading
  // north; the rider looks toward the decision point / destination.
  const std::vector<OrientedRect> parked{
      footprint({6.0, -12.0, kPi / 2.0, 0.0}, {}),
      footprint({2.0, -16.0, kPi / 2.0, 0.0}, {})};
  EscooterParams p;
  p.fov_angle = 120.0;

  // From the starting position the nearest corners sit ~15.7 m and ~16.3 m
  // away: beyond a 10 m FOV, inside a 20 m one.
  EscooterState start{{4.0, -30.0}, {0.0, 0.0}, {}};
  p.fov_radius = 10.0;
  CHECK(perceive(start, p, parked, {-15.0, 15.0}).empty());
  p.fov_radius = 20.0;
  CHECK(perceive(start, p, parked, {-15.0, 15.0}).size() == 2);

  // Partway up the corridor both cars fall inside the 10 m sector.
  EscooterState mid{{4.0, -22.0}, {0.0, 0.0}, {}};
  p.fov_radius = 10.0;
  const std::vector<Vec2> pts = perceive(mid, p, parked, {-15.0, 15.0});
  REQUIRE(pts.size() == 2);
  // Influence points are the closest rect points, in vehicle order.
  const Vec2 q0 = closest_point_on_rect(mid.pos, parked[0]);
  const Vec2 q1 = closest_point_on_rect(mid.pos, parked[1]);
  CHECK(pts[0] == q0);
  CHECK(pts[1] == q1);
}

TEST_CASE("perceive ignores vehicles behind the rider") {
  // Straight-road start: the passing vehicle begins 50 m behind.
  const std::vector<OrientedRect> behind{
      footprint({2.0, -60.0, kPi / 2.0, 10.0}, {})};
  EscooterParams p;
  p.fov_radius = 10.0;
  p.fov_angle = 120.0;
  const EscooterState s{{-4.0, -10.0}, {0.0, 0.0}, {}};
  CHECK(perceive(s, p, behind, {-4.0, -6.0}).empty());
}
