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
 * world_sim.hpp
 *
 * Deterministic 2D lidar simulator over ground-truth floor plans.
 *
 * Beams are cast counter-clockwise starting at theta - fov/2. Range noise is
 * drawn from a counter-based generator keyed on (seed, frame, beam), so any
 * frame can be regenerated independently of the others.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomgp/geometry.hpp"

namespace roomgp {

struct Wall {
  Point2 p1;
  Point2 p2;
  std::optional<int> room;
};

struct FloorPlan {
  std::string name;
  std::vector<Wall> walls;

  bool has_room_labels() const {
    if (walls.empty()) return false;
    for (const auto& w : walls)
      if (!w.room) return false;
    return true;
  }
};

struct Pose {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
};

struct ScanParams {
  int n_beams = 360;
  double fov = 2.0 * std::numbers::pi;
  double max_range = 8.0;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_beams < 1) throw Error("ScanParams: n_beams must be >= 1");
    if (!(max_range > 0.0)) throw Error("ScanParams: max_range must be > 0");
    if (!(noise_sigma >= 0.0)) throw Error("ScanParams: noise_sigma must be >= 0");
    if (!(fov > 0.0) || fov > 2.0 * std::numbers::pi + 1e-12)
      throw Error("ScanParams: fov must be in (0, 2pi]");
  }
};

struct ScanFrame {
  std::int64_t index = 0;
  Pose pose;
  std::vector<Point2> points;                 // world-frame hits, beam order
  std::vector<std::optional<double>> ranges;  // one per beam
};

// ---------------------------------------------------------------------------
// File formats

namespace detail {

inline double json_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(where + ": missing field '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(where + "." + key + ": not finite");
  return d;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace detail

inline FloorPlan parse_floor_plan(const nlohmann::json& j, const std::string& source = "plan") {
  if (!j.is_object()) throw Error(source + ": floor plan must be a JSON object");
  FloorPlan plan;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw Error(source + ".name: expected a string");
    plan.name = j.at("name").get<std::string>();
  }
  if (!j.contains("walls") || !j.at("walls").is_array())
    throw Error(source + ": missing array field 'walls'");
  const auto& walls = j.at("walls");
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string where = source + ".walls[" + std::to_string(i) + "]";
    const auto& w = walls[i];
    Wall wall;
    wall.p1 = {detail::json_number(w, "x1", where), detail::json_number(w, "y1", where)};
    wall.p2 = {detail::json_number(w, "x2", where), detail::json_number(w, "y2", where)};
    if (distance(wall.p1, wall.p2) == 0.0) throw Error(where + ": wall has zero length");
    if (w.contains("room") && !w.at("room").is_null()) {
      if (!w.at("room").is_number_integer()) throw Error(where + ".room: expected an integer");
      wall.room = w.at("room").get<int>();
    }
    plan.walls.push_back(wall);
  }
  if (plan.walls.size() < 3)
    throw Error(source + ": a floor plan needs at least 3 walls, got " +
                std::to_string(plan.walls.size()));
  return plan;
}

inline FloorPlan load_floor_plan(const std::string& path) {
  return parse_floor_plan(detail::parse_json_file(path), path);
}

inline nlohmann::json to_json(const FloorPlan& plan) {
  nlohmann::json walls = nlohmann::json::array();
  for (const auto& w : plan.walls) {
    nlohmann::json jw{{"x1", w.p1.x}, {"y1", w.p1.y}, {"x2", w.p2.x}, {"y2", w.p2.y}};
    if (w.room) jw["room"] = *w.room;
    walls.push_back(jw);
  }
  return {{"name", plan.name}, {"walls", walls}};
}

inline std::vector<Pose> parse_trajectory(const nlohmann::json& j,
                                          const std::string& source = "trajectory") {
  if (!j.is_array()) throw Error(source + ": trajectory must be a JSON array");
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = source + "[" + std::to_string(i) + "]";
    Pose p{detail::json_number(j[i], "t", where), detail::json_number(j[i], "x", where),
           detail::json_number(j[i], "y", where), detail::json_number(j[i], "theta", where)};
    if (!poses.empty() && !(p.t > poses.back().t))
      throw Error(where + ".t: timestamps must be strictly increasing");
    poses.push_back(p);
  }
  return poses;
}

inline std::vector<Pose> load_trajectory(const std::string& path) {
  return parse_trajectory(detail::parse_json_file(path), path);
}

inline nlohmann::json to_json(const std::vector<Pose>& poses) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : poses) out.push_back({{"t", p.t}, {"x", p.x}, {"y", p.y}, {"theta", p.theta}});
  return out;
}

// ---------------------------------------------------------------------------
// Noise

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normal sample as a pure function of (seed, frame, beam).
inline double keyed_normal(std::uint64_t seed, std::uint64_t frame, std::uint64_t beam) {
  const std::uint64_t k = splitmix64(splitmix64(splitmix64(seed) ^ frame) ^ beam);
  const std::uint64_t a = splitmix64(k);
  const std::uint64_t b = splitmix64(a);
  // 53-bit uniforms, u1 in (0, 1].
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ray casting

/// Distance along the unit ray (origin, dir) to the nearest wall, if any.
inline std::optional<double> cast_ray(const FloorPlan& plan, const Point2& origin, const Point2& dir) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : plan.walls) {
    const Point2 s = w.p2 - w.p1;
    const double denom = cross(dir, s);
    if (denom == 0.0) continue;
    const Point2 qp = w.p1 - origin;
    const double t = cross(qp, s) / denom;
    const double u = cross(qp, dir) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) best = std::min(best, t);
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

inline double beam_angle(const Pose& pose, const ScanParams& params, int beam) {
  // A full circle must not duplicate its first beam.
  const bool full = params.fov >= 2.0 * std::numbers::pi - 1e-12;
  const double step =
      params.n_beams == 1 ? 0.0 : params.fov / (full ? params.n_beams : params.n_beams - 1);
  return pose.theta - params.fov / 2.0 + step * beam;
}

inline ScanFrame simulate_scan(const FloorPlan& plan, const Pose& pose, const ScanParams& params,
                               std::int64_t frame_index = 0) {
  params.validate();
  ScanFrame frame;
  frame.index = frame_index;
  frame.pose = pose;
  frame.ranges.resize(static_cast<std::size_t>(params.n_beams));
  const Point2 origin = pose.position();
  for (int b = 0; b < params.n_beams; ++b) {
    const double a = beam_angle(pose, params, b);
    const Point2 dir{std::cos(a), std::sin(a)};
    const auto hit = cast_ray(plan, origin, dir);
    if (!hit || *hit > params.max_range) continue;
    double r = *hit;
    if (params.noise_sigma > 0.0)
      r += params.noise_sigma * detail::keyed_normal(params.seed, static_cast<std::uint64_t>(frame_index),
                                                     static_cast<std::uint64_t>(b));
    if (r <= 0.0 || r > params.max_range) continue;
    frame.ranges[static_cast<std::size_t>(b)] = r;
    frame.points.push_back(origin + dir * r);
  }
  return frame;
}

inline std::vector<ScanFrame> playback(const FloorPlan& plan, const std::vector<Pose>& trajectory,
                                       const ScanParams& params) {
  if (trajectory.empty()) throw Error("playback: empty trajectory");
  std::vector<ScanFrame> frames;
  frames.reserve(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    frames.push_back(simulate_scan(plan, trajectory[i], params, static_cast<std::int64_t>(i)));
  return frames;
}

// ---------------------------------------------------------------------------
// Scan log (JSON lines, one frame per line)

inline nlohmann::json to_json(const ScanFrame& f) {
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : f.ranges) ranges.push_back(r ? nlohmann::json(*r) : nlohmann::json(nullptr));
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : f.points) pts.push_back({p.x, p.y});
  return {{"index", f.index},
          {"pose", {{"t", f.pose.t}, {"x", f.pose.x}, {"y", f.pose.y}, {"theta", f.pose.theta}}},
          {"ranges", ranges},
          {"points", pts}};
}

inline ScanFrame scan_frame_from_json(const nlohmann::json& j) {
  ScanFrame f;
  f.index = j.at("index").get<std::int64_t>();
  const auto& p = j.at("pose");
  f.pose = {p.at("t").get<double>(), p.at("x").get<double>(), p.at("y").get<double>(),
            p.at("theta").get<double>()};
  for (const auto& r : j.at("ranges"))
    f.ranges.push_back(r.is_null() ? std::nullopt : std::optional<double>(r.get<double>()));
  for (const auto& q : j.at("points")) f.points.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
  return f;
}

inline void write_scan_log(const std::string& path, const std::vector<ScanFrame>& frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scan log '" + path + "'");
  out.precision(17);
  for (const auto& f : frames) out << to_json(f).dump() << '\n';
}

inline std::vector<ScanFrame> read_scan_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scan log '" + path + "'");
  std::vector<ScanFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      frames.push_back(scan_frame_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return frames;
}

}  // namespace roomgp
