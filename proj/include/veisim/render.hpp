#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "veisim/experiment.hpp"
#include "veisim/geometry.hpp"

namespace veisim {

// Bird's-eye SVG output: 10 px per meter, y axis flipped so North is up.
struct RenderStyle {
  double px_per_m{10.0};
  double half_extent_m{45.0};  // world half-width/height captured per frame
  double frame_gap_px{10.0};   // spacing between strip frames
};

struct WorldSnapshot {
  double t{0.0};
  MapKind map_kind{MapKind::Intersection};
  double lane_width{4.0};
  std::vector<OrientedRect> vehicles;
  Vec2 escooter;
  Sector fov;
  Vec2 destination;
  bool collision{false};
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct PageTransform {
  double ppm;
  double half;

  double px(double wx) const { return (wx + half) * ppm; }
  double py(double wy) const { return (half - wy) * ppm; }
  double size() const { return 2.0 * half * ppm; }
};

inline std::string svg_line(const PageTransform& tr, double x1, double y1,
                            double x2, double y2, const char* cls,
                            const char* extra) {
  std::string s = "<line class=\"";
  s += cls;
  s += "\" x1=\"" + svg_num(tr.px(x1)) + "\" y1=\"" + svg_num(tr.py(y1)) +
       "\" x2=\"" + svg_num(tr.px(x2)) + "\" y2=\"" + svg_num(tr.py(y2)) +
       "\" ";
  s += extra;
  s += "/>\n";
  return s;
}

// Road surfaces and lane markings for the two scenario maps. Both maps are
// four-lane roads; the intersection adds the crossing road.
inline std::string render_map(const PageTransform& tr, MapKind kind,
                              double lane_width) {
  const double road_half = 2.0 * lane_width;
  const double ext = tr.half;
  std::string s;
  auto road_rect = [&](double x0, double y0, double x1, double y1) {
    s += "<rect class=\"road\" x=\"" + svg_num(tr.px(x0)) + "\" y=\"" +
         svg_num(tr.py(y1)) + "\" width=\"" + svg_num((x1 - x0) * tr.ppm) +
         "\" height=\"" + svg_num((y1 - y0) * tr.ppm) +
         "\" fill=\"#d9d9d9\"/>\n";
  };
  const char* edge_style = "stroke=\"#ffffff\" stroke-width=\"2\"";
  const char* lane_style =
      "stroke=\"#ffffff\" stroke-width=\"1.5\" stroke-dasharray=\"12 10\"";
  const char* center_style = "stroke=\"#e8b33a\" stroke-width=\"2\"";

  // vertical (North-South) road, present in both maps
  road_rect(-road_half, -ext, road_half, ext);
  if (kind == MapKind::Intersection) {
    road_rect(-ext, -road_half, ext, road_half);
    // lane markings stop at the junction box
    for (double sign : {-1.0, 1.0}) {
      const double lo = sign > 0 ? road_half : -ext;
      const double hi = sign > 0 ? ext : -road_half;
      s += svg_line(tr, -lane_width, lo, -lane_width, hi, "lane", lane_style);
      s += svg_line(tr, lane_width, lo, lane_width, hi, "lane", lane_style);
      s += svg_line(tr, 0.0, lo, 0.0, hi, "lane", center_style);
      s += svg_line(tr, lo, -lane_width, hi, -lane_width, "lane", lane_style);
      s += svg_line(tr, lo, lane_width, hi, lane_width, "lane", lane_style);
      s += svg_line(tr, lo, 0.0, hi, 0.0, "lane", center_style);
    }
    for (double sign : {-1.0, 1.0}) {
      const double lo = sign > 0 ? road_half : -ext;
      const double hi = sign > 0 ? ext : -road_half;
      s += svg_line(tr, -road_half, lo, -road_half, hi, "lane", edge_style);
      s += svg_line(tr, road_half, lo, road_half, hi, "lane", edge_style);
      s += svg_line(tr, lo, -road_half, hi, -road_half, "lane", edge_style);
      s += svg_line(tr, lo, road_half, hi, road_half, "lane", edge_style);
    }
  } else {
    s += svg_line(tr, -lane_width, -ext, -lane_width, ext, "lane", lane_style);
    s += svg_line(tr, lane_width, -ext, lane_width, ext, "lane", lane_style);
    s += svg_line(tr, 0.0, -ext, 0.0, ext, "lane", center_style);
    s += svg_line(tr, -road_half, -ext, -road_half, ext, "lane", edge_style);
    s += svg_line(tr, road_half, -ext, road_half, ext, "lane", edge_style);
  }
  return s;
}

inline std::string render_star(const PageTransform& tr, Vec2 center,
                               double outer_px, double inner_px) {
  std::string points;
  for (int i = 0; i < 10; ++i) {
    const double r = i % 2 == 0 ? outer_px : inner_px;
    const double a = std::numbers::pi / 2.0 + i * std::numbers::pi / 5.0;
    if (i > 0) points += ' ';
    points += svg_num(tr.px(center.x) + r * std::cos(a)) + "," +
              svg_num(tr.py(center.y) - r * std::sin(a));
  }
  return "<polygon class=\"destination\" points=\"" + points +
         "\" fill=\"#2255cc\"/>\n";
}

// One frame's element group, without the outer <svg> wrapper.
inline std::string render_frame_group(const WorldSnapshot& w,
                                      const RenderStyle& style) {
  const PageTransform tr{style.px_per_m, style.half_extent_m};
  std::string s;
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" +
       svg_num(tr.size()) + "\" height=\"" + svg_num(tr.size()) +
       "\" fill=\"#f4f1ec\" stroke=\"#888888\"/>\n";
  s += render_map(tr, w.map_kind, w.lane_width);

  // FOV sector wedge under the e-scooter dot
  {
    const Sector& fov = w.fov;
    const double a0 = fov.heading - fov.half_angle;
    const double a1 = fov.heading + fov.half_angle;
    const Vec2 e0{fov.apex.x + fov.radius * std::cos(a0),
                  fov.apex.y + fov.radius * std::sin(a0)};
    const Vec2 e1{fov.apex.x + fov.radius * std::cos(a1),
                  fov.apex.y + fov.radius * std::sin(a1)};
    const double r_px = fov.radius * tr.ppm;
    const int large_arc = fov.half_angle > std::numbers::pi / 2.0 ? 1 : 0;
    s += "<path class=\"fov\" d=\"M " + svg_num(tr.px(fov.apex.x)) + " " +
         svg_num(tr.py(fov.apex.y)) + " L " + svg_num(tr.px(e0.x)) + " " +
         svg_num(tr.py(e0.y)) + " A " + svg_num(r_px) + " " + svg_num(r_px) +
         " 0 " + std::to_string(large_arc) + " 0 " + svg_num(tr.px(e1.x)) +
         " " + svg_num(tr.py(e1.y)) + " Z\" fill=\"#dd2222\" opacity=\"0.25\"/>\n";
  }

  for (const OrientedRect& v : w.vehicles) {
    const double deg = -v.heading * 180.0 / std::numbers::pi;
    s += "<g transform=\"translate(" + svg_num(tr.px(v.center.x)) + " " +
         svg_num(tr.py(v.center.y)) + ") rotate(" + svg_num(deg) + ")\">";
    s += "<rect class=\"vehicle\" x=\"" + svg_num(-v.length / 2.0 * tr.ppm) +
         "\" y=\"" + svg_num(-v.width / 2.0 * tr.ppm) + "\" width=\"" +
         svg_num(v.length * tr.ppm) + "\" height=\"" +
         svg_num(v.width * tr.ppm) +
         "\" fill=\"#f2c230\" stroke=\"#6b5512\"/>";
    s += "</g>\n";
  }

  s += render_star(tr, w.destination, 9.0, 3.6);

  s += "<circle class=\"escooter\" cx=\"" + svg_num(tr.px(w.escooter.x)) +
       "\" cy=\"" + svg_num(tr.py(w.escooter.y)) +
       "\" r=\"4.00\" fill=\"#cc1111\"/>\n";

  if (w.collision) {
    const double cx = tr.px(w.escooter.x);
    const double cy = tr.py(w.escooter.y);
    const double arm = 10.0;
    s += "<g class=\"collision-marker\" stroke=\"#cc1111\" stroke-width=\"3\">";
    s += "<line x1=\"" + svg_num(cx - arm) + "\" y1=\"" + svg_num(cy - arm) +
         "\" x2=\"" + svg_num(cx + arm) + "\" y2=\"" + svg_num(cy + arm) +
         "\"/>";
    s += "<line x1=\"" + svg_num(cx - arm) + "\" y1=\"" + svg_num(cy + arm) +
         "\" x2=\"" + svg_num(cx + arm) + "\" y2=\"" + svg_num(cy - arm) +
         "\"/>";
    s += "</g>\n";
  }

  {
    char label[32];
    std::snprintf(label, sizeof(label), "t=%.1fs", w.t);
    s += "<text class=\"timestamp\" x=\"12\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"18\" fill=\"#222222\">";
    s += label;
    s += "</text>\n";
  }
  return s;
}

}  // namespace detail

inline std::string render_frame(const WorldSnapshot& w,
                                const RenderStyle& style = {}) {
  const double size = 2.0 * style.half_extent_m * style.px_per_m;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      detail::svg_num(size) + "\" height=\"" + detail::svg_num(size) +
      "\" viewBox=\"0 0 " + detail::svg_num(size) + " " +
      detail::svg_num(size) + "\">\n";
  svg += detail::render_frame_group(w, style);
  svg += "</svg>\n";
  return svg;
}

// Snapshot of the logged world nearest to time t. The FOV heading follows the
// e-scooter's velocity when moving, otherwise its current planner target.
inline WorldSnapshot snapshot_at(const TrajectoryLog& log, double t) {
  if (log.steps.empty()) {
    throw std::runtime_error("snapshot_at: empty trajectory");
  }
  const double t0 = log.steps.front().t;
  const double t1 = log.steps.back().t;
  if (t < t0 || t > t1) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "time %g outside trajectory range [%g, %g]", t, t0, t1);
    throw std::runtime_error(msg);
  }
  size_t best = 0;
  double best_err = std::abs(log.steps[0].t - t);
  for (size_t i = 1; i < log.steps.size(); ++i) {
    const double err = std::abs(log.steps[i].t - t);
    if (err < best_err) {
      best = i;
      best_err = err;
    }
  }
  const TrajectoryStep& step = log.steps[best];

  WorldSnapshot w;
  w.t = step.t;
  w.map_kind = log.map_kind;
  w.lane_width = log.lane_width;
  w.destination = log.destination;
  for (size_t i = 0; i < step.vehicles.size(); ++i) {
    const VehicleSpec spec = i < log.vehicle_specs.size() ? log.vehicle_specs[i]
                                                          : VehicleSpec{};
    w.vehicles.push_back(footprint(step.vehicles[i], spec));
  }
  w.escooter = step.escooter.pos;
  const Vec2 target = step.escooter.mode.phase == FsmPhase::Approach
                          ? log.decision_point
                          : log.destination;
  const Vec2 facing = fov_heading(step.escooter, target);
  w.fov = {step.escooter.pos, std::atan2(facing.y, facing.x), log.fov_radius,
           log.fov_angle * std::numbers::pi / 180.0 / 2.0};
  w.collision = false;
  for (const OrientedRect& r : w.vehicles) {
    if (point_in_rect(step.escooter.pos, r, log.body_radius)) {
      w.collision = true;
      break;
    }
  }
  return w;
}

// One frame per requested time, laid out left to right.
inline std::string render_strip(const TrajectoryLog& log,
                                const std::vector<double>& times,
                                const RenderStyle& style = {}) {
  if (times.empty()) {
    throw std::runtime_error("render_strip: no times requested");
  }
  if (times.size() == 1) {
    return render_frame(snapshot_at(log, times[0]), style);
  }
  const double frame = 2.0 * style.half_extent_m * style.px_per_m;
  const double width =
      frame * static_cast<double>(times.size()) +
      style.frame_gap_px * static_cast<double>(times.size() - 1);
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      detail::svg_num(width) + "\" height=\"" + detail::svg_num(frame) +
      "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
      detail::svg_num(frame) + "\">\n";
  for (size_t i = 0; i < times.size(); ++i) {
    const WorldSnapshot w = snapshot_at(log, times[i]);
    const double dx = static_cast<double>(i) * (frame + style.frame_gap_px);
    svg += "<g transform=\"translate(" + detail::svg_num(dx) + " 0)\">\n";
    svg += detail::render_frame_group(w, style);
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace veisim
