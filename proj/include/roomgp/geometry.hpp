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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roomgp {

/// Error type thrown for contract violations anywhere in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerance for "on the line" classifications, meters.
inline constexpr double kOnTolerance = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  constexpr Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Point2&) const = default;
};

constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }
inline bool is_finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline Point2 normalized(const Point2& a) {
  const double n = norm(a);
  if (n == 0.0) throw Error("cannot normalize a zero vector");
  return {a.x / n, a.y / n};
}

/// Left-hand perpendicular (rotation by +90 degrees).
constexpr Point2 perp(const Point2& a) { return {-a.y, a.x}; }

using SegmentId = std::int64_t;

/// A wall segment with the normal pointing into the observed free space and
/// the robot position it was last observed from.
struct LineSegment {
  Point2 p1;
  Point2 p2;
  Point2 normal{0.0, 1.0};
  Point2 last_robot_pos;
  SegmentId id = -1;

  double length() const { return distance(p1, p2); }
  Point2 midpoint() const { return (p1 + p2) * 0.5; }
  Point2 direction() const { return normalized(p2 - p1); }
};

/// Builds a segment whose normal is the left perpendicular of p1->p2.
inline LineSegment make_segment(Point2 p1, Point2 p2, SegmentId id = -1) {
  LineSegment s;
  s.p1 = p1;
  s.p2 = p2;
  s.normal = perp(normalized(p2 - p1));
  s.last_robot_pos = s.midpoint() + s.normal;
  s.id = id;
  return s;
}

/// Builds a segment with its normal facing `robot`.
inline LineSegment make_segment_facing(Point2 p1, Point2 p2, Point2 robot, SegmentId id = -1) {
  LineSegment s = make_segment(p1, p2, id);
  if (dot(s.normal, robot - s.p1) < 0.0) s.normal = s.normal * -1.0;
  s.last_robot_pos = robot;
  return s;
}

struct Aabb {
  Point2 min;
  Point2 max;

  bool contains(const Point2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  /// Euclidean distance from p to the box (0 inside).
  double distance_to(const Point2& p) const {
    const double dx = std::max({min.x - p.x, 0.0, p.x - max.x});
    const double dy = std::max({min.y - p.y, 0.0, p.y - max.y});
    return std::hypot(dx, dy);
  }
  bool intersects_disc(const Point2& c, double r) const { return distance_to(c) <= r; }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

/// Closest point of the closed segment [a, b] to p.
inline Point2 closest_point_on_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) throw Error("degenerate segment (zero length)");
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  return distance(p, closest_point_on_segment(p, a, b));
}

inline double segment_point_distance(const Point2& p, const LineSegment& s) {
  return point_segment_distance(p, s.p1, s.p2);
}

/// Shortest distance between two closed segments.
inline double segment_segment_distance(const LineSegment& a, const LineSegment& b);

struct IntersectionResult {
  std::optional<Point2> point;
  bool collinear = false;
};

/// Transversal intersection of two closed segments. Collinear overlap is not
/// reported as an intersection; the `collinear` flag is set instead.
inline IntersectionResult segments_intersect(const Point2& a1, const Point2& a2, const Point2& b1,
                                             const Point2& b2) {
  const Point2 r = a2 - a1;
  const Point2 s = b2 - b1;
  const double denom = cross(r, s);
  const Point2 qp = b1 - a1;
  const double scale = std::max({norm(r) * norm(s), 1e-300});
  if (std::abs(denom) <= kOnTolerance * scale) {
    IntersectionResult res;
    // Parallel; collinear when b1 lies on a's supporting line.
    res.collinear = std::abs(cross(qp, r)) <= kOnTolerance * std::max(norm(r), 1e-300);
    return res;
  }
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  constexpr double eps = 1e-12;
  if (t < -eps || t > 1.0 + eps || u < -eps || u > 1.0 + eps) return {};
  return {a1 + r * std::clamp(t, 0.0, 1.0), false};
}

inline IntersectionResult segments_intersect(const LineSegment& s1, const LineSegment& s2) {
  return segments_intersect(s1.p1, s1.p2, s2.p1, s2.p2);
}

/// Intersection of the two infinite supporting lines, none when parallel.
inline std::optional<Point2> line_line_intersection(const Point2& a1, const Point2& a2,
                                                    const Point2& b1, const Point2& b2) {
  const Point2 r = a2 - a1;
  const Point2 s = b2 - b1;
  const double denom = cross(r, s);
  if (std::abs(denom) <= 1e-12 * norm(r) * norm(s)) return std::nullopt;
  const double t = cross(b1 - a1, s) / denom;
  return a1 + r * t;
}

inline double segment_segment_distance(const LineSegment& a, const LineSegment& b) {
  if (segments_intersect(a, b).point) return 0.0;
  return std::min({segment_point_distance(a.p1, b), segment_point_distance(a.p2, b),
                   segment_point_distance(b.p1, a), segment_point_distance(b.p2, a)});
}

enum class Side { positive, negative, on };

/// Side of p relative to the supporting line of s, judged by s.normal.
inline Side half_plane_side(const Point2& p, const LineSegment& s) {
  const double v = dot(s.normal, p - s.p1);
  if (std::abs(v) <= kOnTolerance) return Side::on;
  return v > 0.0 ? Side::positive : Side::negative;
}

inline Aabb bounding_box(std::span<const LineSegment> segments) {
  if (segments.empty()) throw Error("bounding_box of an empty segment list");
  Aabb box{segments.front().p1, segments.front().p1};
  for (const auto& s : segments) {
    for (const auto& p : {s.p1, s.p2}) {
      box.min.x = std::min(box.min.x, p.x);
      box.min.y = std::min(box.min.y, p.y);
      box.max.x = std::max(box.max.x, p.x);
      box.max.y = std::max(box.max.y, p.y);
    }
  }
  return box;
}

/// Angle between the undirected directions of two segments, radians in [0, pi/2].
inline double undirected_angle(const LineSegment& a, const LineSegment& b) {
  const double c = std::abs(dot(a.direction(), b.direction()));
  return std::acos(std::clamp(c, 0.0, 1.0));
}

/// Checks the LineSegment invariants for a given minimum length.
inline void validate_segment(const LineSegment& s, double min_length = 0.0) {
  if (!is_finite(s.p1) || !is_finite(s.p2)) throw Error("segment has non-finite endpoints");
  const double len = s.length();
  if (len == 0.0) throw Error("degenerate segment (zero length)");
  if (len < min_length) throw Error("segment shorter than the minimum length");
  if (std::abs(norm(s.normal) - 1.0) > 1e-9) throw Error("segment normal is not unit length");
  if (std::abs(dot(s.normal, (s.p2 - s.p1) * (1.0 / len))) > 1e-9)
    throw Error("segment normal is not perpendicular to its direction");
}

}  // namespace roomgp
