// Copyright 2026 The roomgp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * svg.hpp
 *
 * Map snapshots as SVG: segments colored by room, residual points, robot
 * pose, room connectivity and (optionally) distance iso-contours of one
 * room's model, traced with marching squares.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "roomgp/geometry.hpp"
#include "roomgp/pipeline.hpp"
#include "roomgp/rooms.hpp"
#include "roomgp/world_sim.hpp"

namespace roomgp {

using ContourSegment = std::pair<Point2, Point2>;

/// Iso-lines of `field` at `level` over `box`, sampled on a square grid of
/// spacing `step`. Saddle cells are resolved with the cell-center average.
inline std::vector<ContourSegment> marching_squares(const std::function<double(const Point2&)>& field,
                                                    const Aabb& box, double step, double level) {
  if (!(step > 0.0)) throw Error("marching_squares: grid step must be positive");
  const int nx = static_cast<int>(std::ceil((box.max.x - box.min.x) / step)) + 1;
  const int ny = static_cast<int>(std::ceil((box.max.y - box.min.y) / step)) + 1;
  if (nx < 2 || ny < 2) return {};
  auto at = [&](int i, int j) { return Point2{box.min.x + i * step, box.min.y + j * step}; };
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) v[static_cast<std::size_t>(j) * nx + i] = field(at(i, j));
  auto val = [&](int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; };

  std::vector<ContourSegment> out;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      // Corners counter-clockwise from the lower left.
      const std::array<Point2, 4> p{at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      const std::array<double, 4> f{val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
      if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2]) || !std::isfinite(f[3])) continue;
      // Crossing on edge e (corner e -> corner e+1): bottom, right, top, left.
      std::array<std::optional<Point2>, 4> cross;
      int n = 0;
      for (int e = 0; e < 4; ++e) {
        const double a = f[e], b = f[(e + 1) % 4];
        if ((a < level) == (b < level)) continue;
        const double t = (level - a) / (b - a);
        cross[e] = p[e] + (p[(e + 1) % 4] - p[e]) * t;
        ++n;
      }
      if (n == 2) {
        std::vector<Point2> q;
        for (const auto& c : cross)
          if (c) q.push_back(*c);
        out.emplace_back(q[0], q[1]);
      } else if (n == 4) {
        const bool center_below = 0.25 * (f[0] + f[1] + f[2] + f[3]) < level;
        if (center_below == (f[0] < level)) {
          // Lower-left and upper-right corners join through the center.
          out.emplace_back(*cross[0], *cross[1]);
          out.emplace_back(*cross[2], *cross[3]);
        } else {
          out.emplace_back(*cross[0], *cross[3]);
          out.emplace_back(*cross[1], *cross[2]);
        }
      }
    }
  return out;
}

struct SvgOptions {
  bool contours = true;
  double grid = 0.1;  // contour sampling step, m
  std::vector<double> levels{0.05, 0.5, 1.0, 1.5};
  double contour_margin = 0.5;  // grid extends this far past the room's segments
  double pixels_per_meter = 50.0;
  double border = 0.5;  // m of empty space around the drawing
  bool draw_points = true;
};

struct ContourSet {
  double level = 0.0;
  std::vector<ContourSegment> segments;
};

/// Everything the writer draws; assembled by scene_from_pipeline or by hand.
struct SvgScene {
  std::vector<LineSegment> segments;
  std::vector<RoomId> labels;  // empty: all segments share one color
  std::set<std::pair<RoomId, RoomId>> connectivity;
  std::vector<Point2> points;
  std::optional<Pose> robot;
  std::vector<ContourSet> contours;
};

namespace detail {

/// "#rrggbb" for an HSL color (h in degrees, s and l in [0, 1]).
inline std::string hsl_hex(double h, double s, double l) {
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  const double hp = std::fmod(h, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = l - 0.5 * c;
  auto byte = [m](double v) { return static_cast<int>(std::lround(255.0 * std::clamp(v + m, 0.0, 1.0))); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", byte(r), byte(g), byte(b));
  return buf;
}

inline std::string room_color(std::size_t index) {
  // Golden-angle hue steps keep neighbouring indices far apart.
  return hsl_hex(std::fmod(index * 137.508, 360.0), 0.75, 0.45);
}

inline Point2 room_center(const SvgScene& s, RoomId id) {
  Point2 c{0.0, 0.0};
  int n = 0;
  for (std::size_t i = 0; i < s.segments.size(); ++i)
    if (s.labels[i] == id) {
      c = c + s.segments[i].midpoint();
      ++n;
    }
  return n ? c * (1.0 / n) : c;
}

}  // namespace detail

inline std::string render_svg(const SvgScene& scene, const SvgOptions& opt = {}) {
  if (scene.segments.empty() && scene.points.empty()) throw Error("export_svg: nothing to draw");
  if (!scene.labels.empty() && scene.labels.size() != scene.segments.size())
    throw Error("export_svg: one label per segment expected");
  Aabb box{{1e300, 1e300}, {-1e300, -1e300}};
  auto grow = [&](const Point2& p) {
    box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y)};
    box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y)};
  };
  for (const auto& s : scene.segments) {
    grow(s.p1);
    grow(s.p2);
  }
  for (const auto& p : scene.points) grow(p);
  if (scene.robot) grow(scene.robot->position());
  box.min = box.min - Point2{opt.border, opt.border};
  box.max = box.max + Point2{opt.border, opt.border};
  const double k = opt.pixels_per_meter;
  auto X = [&](double x) { return (x - box.min.x) * k; };
  auto Y = [&](double y) { return (box.max.y - y) * k; };

  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (box.max.x - box.min.x) * k << "\" height=\""
    << (box.max.y - box.min.y) * k << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::map<RoomId, std::string> colors;
  if (!scene.labels.empty()) {
    std::set<RoomId> ids(scene.labels.begin(), scene.labels.end());
    std::size_t c = 0;
    for (RoomId id : ids) colors[id] = detail::room_color(c++);
  }

  for (std::size_t ci = 0; ci < scene.contours.size(); ++ci) {
    const auto& cs = scene.contours[ci];
    if (cs.segments.empty()) continue;
    const double shade = scene.contours.size() > 1 ? static_cast<double>(ci) / (scene.contours.size() - 1) : 0.0;
    const std::string stroke = detail::hsl_hex(240.0 * shade, 0.8, 0.55);
    o << "<path class=\"contour\" data-level=\"" << cs.level << "\" fill=\"none\" stroke=\"" << stroke
      << "\" stroke-width=\"1\" d=\"";
    for (const auto& [a, b] : cs.segments) o << 'M' << X(a.x) << ' ' << Y(a.y) << 'L' << X(b.x) << ' ' << Y(b.y);
    o << "\"/>\n";
  }

  if (opt.draw_points)
    for (const auto& p : scene.points)
      o << "<circle class=\"point\" cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y) << "\" r=\"1.5\" fill=\"#444\"/>\n";

  for (std::size_t i = 0; i < scene.segments.size(); ++i) {
    const auto& s = scene.segments[i];
    const std::string color = scene.labels.empty() ? "black" : colors.at(scene.labels[i]);
    o << "<line class=\"segment\" x1=\"" << X(s.p1.x) << "\" y1=\"" << Y(s.p1.y) << "\" x2=\"" << X(s.p2.x)
      << "\" y2=\"" << Y(s.p2.y) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
  }

  if (!scene.labels.empty())
    for (const auto& [a, b] : scene.connectivity) {
      if (!colors.count(a) || !colors.count(b)) continue;
      const Point2 ca = detail::room_center(scene, a), cb = detail::room_center(scene, b);
      o << "<line class=\"connectivity\" x1=\"" << X(ca.x) << "\" y1=\"" << Y(ca.y) << "\" x2=\"" << X(cb.x)
        << "\" y2=\"" << Y(cb.y) << "\" stroke=\"gray\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
    }

  if (scene.robot) {
    const Pose& r = *scene.robot;
    const Point2 tip{r.x + 0.4 * std::cos(r.theta), r.y + 0.4 * std::sin(r.theta)};
    o << "<circle class=\"robot\" cx=\"" << X(r.x) << "\" cy=\"" << Y(r.y) << "\" r=\"6\" fill=\"red\"/>\n";
    o << "<line class=\"heading\" x1=\"" << X(r.x) << "\" y1=\"" << Y(r.y) << "\" x2=\"" << X(tip.x) << "\" y2=\""
      << Y(tip.y) << "\" stroke=\"red\" stroke-width=\"2\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void export_svg(const SvgScene& scene, const std::string& path, const SvgOptions& opt = {}) {
  const std::string text = render_svg(scene, opt);
  std::ofstream out(path);
  if (!out) throw Error("export_svg: cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("export_svg: write to '" + path + "' failed");
}

/// Scene of a pipeline's current state. Contours come from the model that
/// answers queries at the robot position (the current room for room_based).
inline SvgScene scene_from_pipeline(const Pipeline& p, const SvgOptions& opt = {}) {
  SvgScene s;
  if (p.variant() == Variant::room_based) {
    s.segments = p.rooms().segments;
    s.labels = p.rooms().labels;
    s.connectivity = p.rooms().connectivity;
  } else {
    s.segments = p.stored_lines();
  }
  s.points = p.residual_points();
  if (!p.metrics().empty()) s.robot = p.robot();
  if (!opt.contours || !s.robot) return s;

  const GpEdfModel* model = p.model_at(s.robot->position());
  if (!model) return s;
  std::vector<LineSegment> support = model->lines();
  Aabb box;
  if (!support.empty()) {
    box = bounding_box(support);
  } else if (!model->inducing().empty()) {
    box = {model->inducing().front(), model->inducing().front()};
    for (const auto& z : model->inducing()) {
      box.min = {std::min(box.min.x, z.x), std::min(box.min.y, z.y)};
      box.max = {std::max(box.max.x, z.x), std::max(box.max.y, z.y)};
    }
  } else {
    return s;
  }
  box.min = box.min - Point2{opt.contour_margin, opt.contour_margin};
  box.max = box.max + Point2{opt.contour_margin, opt.contour_margin};
  auto field = [model](const Point2& x) { return model->query_distance(x).distance; };
  for (double level : opt.levels) s.contours.push_back({level, marching_squares(field, box, opt.grid, level)});
  return s;
}

}  // namespace roomgp
