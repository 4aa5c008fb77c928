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
 * line_extraction.hpp
 *
 * Scan -> wall segments. Consecutive returns are grouped by a Euclidean gap
 * threshold, each group is cut with split-and-merge over total-least-squares
 * fits, and accepted segments are fused into a global store.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "roomgp/geometry.hpp"
#include "roomgp/world_sim.hpp"

namespace roomgp {

struct LineParams {
  double gap_threshold = 0.2;
  double split_deviation = 0.05;
  int min_points_per_segment = 8;
  double min_length = 0.3;  // L_min
  double merge_angle = 5.0 * std::numbers::pi / 180.0;
  double merge_offset = 0.1;
  double merge_gap = 0.1;
};

using ClusterId = std::int64_t;

struct PointCluster {
  std::vector<Point2> points;
  Pose frame_pose;
  ClusterId cluster_id = 0;
};

struct ExtractionResult {
  std::vector<LineSegment> segments;
  /// Half-open index ranges into the cluster's points, one per segment.
  std::vector<std::pair<std::size_t, std::size_t>> segment_ranges;
  std::vector<std::pair<Point2, ClusterId>> residual_points;
};

/// Infinite line through `centroid` along unit `direction`.
struct FittedLine {
  Point2 centroid;
  Point2 direction{1.0, 0.0};

  double deviation(const Point2& p) const { return std::abs(cross(direction, p - centroid)); }
  double project(const Point2& p) const { return dot(direction, p - centroid); }
  Point2 at(double t) const { return centroid + direction * t; }
};

namespace detail {

/// Principal axis of a 2x2 scatter matrix.
inline Point2 principal_axis(double sxx, double sxy, double syy) {
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace detail

/// Total-least-squares line through a point set (principal axis).
inline FittedLine fit_line_tls(std::span<const Point2> pts) {
  if (pts.empty()) throw Error("fit_line_tls: no points");
  Point2 c{0.0, 0.0};
  for (const auto& p : pts) c = c + p;
  c = c * (1.0 / static_cast<double>(pts.size()));
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : pts) {
    const Point2 d = p - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  return {c, detail::principal_axis(sxx, sxy, syy)};
}

/// Length-weighted TLS line through a set of segments, treating each as a
/// uniform mass distribution along its length.
inline FittedLine fit_line_tls(std::span<const LineSegment> segs) {
  double total = 0.0;
  Point2 c{0.0, 0.0};
  for (const auto& s : segs) {
    total += s.length();
    c = c + s.midpoint() * s.length();
  }
  if (total == 0.0) throw Error("fit_line_tls: zero total length");
  c = c * (1.0 / total);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& s : segs) {
    const double w = s.length();
    const Point2 m = s.midpoint() - c;
    const Point2 d = s.p2 - s.p1;
    sxx += w * (m.x * m.x + d.x * d.x / 12.0);
    sxy += w * (m.x * m.y + d.x * d.y / 12.0);
    syy += w * (m.y * m.y + d.y * d.y / 12.0);
  }
  return {c, detail::principal_axis(sxx, sxy, syy)};
}

struct OrientResult {
  LineSegment segment;
  bool robot_on_line = false;
};

/// Orients the normal so that robot_pos lies in the positive half-plane.
inline OrientResult orient_normal(LineSegment s, const Point2& robot_pos) {
  const Point2 n = perp(s.direction());
  const double v = dot(n, robot_pos - s.p1);
  if (std::abs(v) <= kOnTolerance) return {s, true};
  s.normal = v > 0.0 ? n : n * -1.0;
  return {s, false};
}

/// Groups consecutive returns; a new cluster starts when the gap between
/// consecutive hits exceeds gap_threshold. With `wrap_around` the last and
/// first clusters of a full-circle scan are joined when they are close.
inline std::vector<PointCluster> cluster_scan_points(const ScanFrame& frame, const LineParams& params,
                                                     bool wrap_around = true) {
  std::vector<PointCluster> clusters;
  if (frame.points.empty()) return clusters;
  auto start_cluster = [&]() {
    PointCluster c;
    c.frame_pose = frame.pose;
    c.cluster_id = frame.index * 100000 + static_cast<ClusterId>(clusters.size());
    clusters.push_back(std::move(c));
  };
  start_cluster();
  clusters.back().points.push_back(frame.points.front());
  for (std::size_t i = 1; i < frame.points.size(); ++i) {
    if (distance(frame.points[i], frame.points[i - 1]) > params.gap_threshold) start_cluster();
    clusters.back().points.push_back(frame.points[i]);
  }
  const bool ends_returned =
      !frame.ranges.empty() && frame.ranges.front().has_value() && frame.ranges.back().has_value();
  if (wrap_around && clusters.size() > 1 && ends_returned &&
      distance(frame.points.back(), frame.points.front()) <= params.gap_threshold) {
    auto& last = clusters.back().points;
    auto& first = clusters.front().points;
    last.insert(last.end(), first.begin(), first.end());
    first = std::move(last);
    clusters.pop_back();
  }
  return clusters;
}

namespace detail {

inline std::size_t max_chord_deviation_index(std::span<const Point2> pts) {
  const Point2 a = pts.front();
  const Point2 b = pts.back();
  const double len = distance(a, b);
  std::size_t best = pts.size() / 2;
  double best_dev = -1.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double dev = len > 0.0 ? std::abs(cross(b - a, pts[i] - a)) / len : distance(pts[i], a);
    if (dev > best_dev) {
      best_dev = dev;
      best = i;
    }
  }
  return best;
}

inline double max_tls_deviation(std::span<const Point2> pts) {
  const FittedLine line = fit_line_tls(pts);
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, line.deviation(p));
  return m;
}

/// Recursive split: ranges whose TLS fit stays within split_deviation.
inline void split_recursive(std::span<const Point2> pts, std::size_t begin, std::size_t end,
                            double split_deviation,
                            std::vector<std::pair<std::size_t, std::size_t>>& out) {
  const std::size_t n = end - begin;
  if (n <= 2 || max_tls_deviation(pts.subspan(begin, n)) <= split_deviation) {
    out.emplace_back(begin, end);
    return;
  }
  // The cut point is the farthest point from the chord; it joins the left run.
  const std::size_t k = begin + max_chord_deviation_index(pts.subspan(begin, n));
  split_recursive(pts, begin, k + 1, split_deviation, out);
  split_recursive(pts, k + 1, end, split_deviation, out);
}

}  // namespace detail

/// Split-and-merge over one cluster. Rejected runs become residual points.
inline ExtractionResult extract_segments(const PointCluster& cluster, const LineParams& params) {
  ExtractionResult result;
  const std::span<const Point2> pts(cluster.points);
  if (pts.empty()) return result;

  std::vector<std::pair<std::size_t, std::size_t>> runs;
  detail::split_recursive(pts, 0, pts.size(), params.split_deviation, runs);

  // Merge adjacent runs whose joint fit is still within tolerance.
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& r : runs) {
    if (!merged.empty()) {
      auto& prev = merged.back();
      const auto joint = pts.subspan(prev.first, r.second - prev.first);
      if (detail::max_tls_deviation(joint) <= params.split_deviation) {
        prev.second = r.second;
        continue;
      }
    }
    merged.push_back(r);
  }

  const Point2 robot = cluster.frame_pose.position();
  for (const auto& [b, e] : merged) {
    const auto run = pts.subspan(b, e - b);
    bool accepted = false;
    if (static_cast<int>(run.size()) >= params.min_points_per_segment) {
      const FittedLine line = fit_line_tls(run);
      double tmin = line.project(run.front());
      double tmax = tmin;
      for (const auto& p : run) {
        tmin = std::min(tmin, line.project(p));
        tmax = std::max(tmax, line.project(p));
      }
      if (tmax - tmin >= params.min_length) {
        LineSegment s;
        s.p1 = line.at(tmin);
        s.p2 = line.at(tmax);
        s.last_robot_pos = robot;
        s = orient_normal(s, robot).segment;
        result.segments.push_back(s);
        result.segment_ranges.emplace_back(b, e);
        accepted = true;
      }
    }
    if (!accepted)
      for (const auto& p : run) result.residual_points.emplace_back(p, cluster.cluster_id);
  }
  return result;
}

/// Merge test between a stored segment and a candidate.
inline bool segments_mergeable(const LineSegment& a, const LineSegment& b, const LineParams& params) {
  if (dot(a.normal, b.normal) <= 0.0) return false;
  if (undirected_angle(a, b) > params.merge_angle) return false;
  auto offset = [](const LineSegment& ref, const LineSegment& o) {
    return std::max(std::abs(dot(ref.normal, o.p1 - ref.p1)), std::abs(dot(ref.normal, o.p2 - ref.p1)));
  };
  if (std::max(offset(a, b), offset(b, a)) > params.merge_offset) return false;
  const Point2 d = a.direction();
  const double a0 = 0.0, a1 = a.length();
  const double b0 = dot(d, b.p1 - a.p1), b1 = dot(d, b.p2 - a.p1);
  const double gap = std::max(std::min(b0, b1) - a1, a0 - std::max(b0, b1));
  return gap <= params.merge_gap;
}

/// Fuses two segments into one spanning the union of their projections onto
/// the joint TLS line. Keeps `older`'s id and takes `newer`'s robot position.
inline LineSegment fuse_segments(const LineSegment& older, const LineSegment& newer) {
  const LineSegment both[] = {older, newer};
  const FittedLine line = fit_line_tls(std::span<const LineSegment>(both));
  double tmin = line.project(older.p1), tmax = tmin;
  for (const auto& p : {older.p1, older.p2, newer.p1, newer.p2}) {
    tmin = std::min(tmin, line.project(p));
    tmax = std::max(tmax, line.project(p));
  }
  LineSegment s;
  s.p1 = line.at(tmin);
  s.p2 = line.at(tmax);
  s.id = older.id;
  s.last_robot_pos = newer.last_robot_pos;
  const OrientResult o = orient_normal(s, newer.last_robot_pos);
  s = o.segment;
  if (o.robot_on_line) {
    const Point2 n = perp(s.direction());
    s.normal = dot(n, newer.normal) >= 0.0 ? n : n * -1.0;
  }
  return s;
}

/// Incorporates new segments into the global store; merged segments keep the
/// stored id, unmatched ones get fresh ids from `next_id`.
inline void merge_segments(std::vector<LineSegment>& global_set, std::span<const LineSegment> new_segments,
                           const LineParams& params, SegmentId& next_id) {
  for (LineSegment cur : new_segments) {
    cur.id = -1;
    for (;;) {
      auto it = std::find_if(global_set.begin(), global_set.end(),
                             [&](const LineSegment& g) { return segments_mergeable(g, cur, params); });
      if (it == global_set.end()) break;
      // Keep the stored segment's identity when fusing; older ids win.
      const LineSegment stored = *it;
      global_set.erase(it);
      LineSegment fused = fuse_segments(stored, cur);
      if (cur.id >= 0) fused.id = std::min(stored.id, cur.id);
      cur = fused;
    }
    if (cur.id < 0) cur.id = next_id++;
    global_set.push_back(cur);
  }
}

}  // namespace roomgp
