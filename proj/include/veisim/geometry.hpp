#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace veisim {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double norm_sq() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Normalizes an angle to (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Axis convention: heading 0 points along +x (East), counterclockwise positive.
struct OrientedRect {
  Vec2 center;
  double heading{0.0};  // radians, normalized to (-pi, pi]
  double length{0.0};   // extent along the heading axis, > 0
  double width{0.0};    // extent across the heading axis, > 0
};

struct Sector {
  Vec2 apex;
  double heading{0.0};
  double radius{0.0};      // > 0
  double half_angle{0.0};  // radians, (0, pi]
};

namespace detail {

// Coordinates of p in the rect frame (origin center, x along heading).
inline Vec2 rect_local(Vec2 p, const OrientedRect& r) {
  const double c = std::cos(r.heading);
  const double s = std::sin(r.heading);
  const Vec2 d = p - r.center;
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 rect_world(Vec2 local, const OrientedRect& r) {
  const double c = std::cos(r.heading);
  const double s = std::sin(r.heading);
  return {r.center.x + c * local.x - s * local.y,
          r.center.y + s * local.x + c * local.y};
}

}  // namespace detail

// Closest point of the rect (boundary or interior) to p; p itself when inside.
inline Vec2 closest_point_on_rect(Vec2 p, const OrientedRect& r) {
  const Vec2 local = detail::rect_local(p, r);
  const Vec2 clamped{std::clamp(local.x, -r.length / 2.0, r.length / 2.0),
                     std::clamp(local.y, -r.width / 2.0, r.width / 2.0)};
  return detail::rect_world(clamped, r);
}

// Containment test against the rect grown by `inflate` on each half-extent.
inline bool point_in_rect(Vec2 p, const OrientedRect& r, double inflate = 0.0) {
  const Vec2 local = detail::rect_local(p, r);
  return std::abs(local.x) <= r.length / 2.0 + inflate &&
         std::abs(local.y) <= r.width / 2.0 + inflate;
}

// Sampled sector-rectangle overlap: tests the rect's four corners and its
// center for membership in the sector. Misses only grazing overlaps smaller
// than half the rect footprint.
inline bool sector_contains_rect(const Sector& s, const OrientedRect& r) {
  const Vec2 corners_local[4] = {{r.length / 2.0, r.width / 2.0},
                                 {r.length / 2.0, -r.width / 2.0},
                                 {-r.length / 2.0, r.width / 2.0},
                                 {-r.length / 2.0, -r.width / 2.0}};
  const Vec2 facing{std::cos(s.heading), std::sin(s.heading)};
  const double cos_half = std::cos(s.half_angle);
  auto inside = [&](Vec2 q) {
    const Vec2 v = q - s.apex;
    const double d = v.norm();
    if (d > s.radius) return false;
    // The apex itself has no bearing; count it as inside.
    return d == 0.0 || facing.dot(v) >= cos_half * d;
  };
  if (inside(r.center)) return true;
  for (const Vec2& c : corners_local) {
    if (inside(detail::rect_world(c, r))) return true;
  }
  return false;
}

}  // namespace veisim
