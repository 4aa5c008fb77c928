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
 * room_segmentation.hpp
 *
 * Line-based room segmentation.
 *
 *   stored segments --(corner connect, corner split, doorway split)--> G^D
 *   G^D --(neighbor, passage and visibility edges)--> G^V
 *   G^V --(spectral clustering + incremental split/merge)--> RoomSet
 *
 * Visibility edges are weighted by W = W_d * W_r * W_l, where W_d decays with
 * the squared segment distance, W_r with the distance between the robot
 * positions the segments were last seen from, and W_l favors long segments.
 * Neighbor and passage edges have weight 1.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roomgp/geometry.hpp"
#include "roomgp/room_index.hpp"
#include "roomgp/rooms.hpp"
#include "roomgp/spectral.hpp"

namespace roomgp {

struct SegConfig {
  double corner_threshold = 0.4;  // D_c
  double doorway_min = 0.8;       // d_min
  double doorway_max = 3.0;       // d_max
  double visibility_radius = 8.0; // D_v
  double gamma_d = 0.02;
  double gamma_r = 0.005;
  double fiedler_threshold = 0.18;     // T_lambda
  double edge_ratio_threshold = 0.5;   // T_e
  int k_max = 12;
  double min_length = 0.3;  // L_min
  double parallel_angle = 10.0 * std::numbers::pi / 180.0;
  double collinear_angle = 5.0 * std::numbers::pi / 180.0;
  double collinear_offset = 0.1;

  void validate() const {
    if (!(0.0 < doorway_min && doorway_min < doorway_max))
      throw Error("SegConfig: require 0 < d_min < d_max");
    if (gamma_d < 0.0 || gamma_r < 0.0) throw Error("SegConfig: weight rates must be >= 0");
    if (!(corner_threshold > 0.0) || !(visibility_radius > 0.0))
      throw Error("SegConfig: thresholds must be positive");
    if (k_max < 1) throw Error("SegConfig: k_max must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// G^D: segment graph with corner links

struct EndpointRef {
  std::size_t seg = 0;
  int end = 0;  // 0 -> p1, 1 -> p2
  bool operator==(const EndpointRef&) const = default;
};

struct CornerLink {
  EndpointRef from;
  EndpointRef to;
};

struct SegmentGraph {
  std::vector<LineSegment> segments;
  std::vector<SegmentId> source_ids;
  std::vector<CornerLink> links;
  SegmentId next_id = 0;

  static SegmentGraph from_segments(std::span<const LineSegment> segs) {
    SegmentGraph g;
    for (const auto& s : segs) {
      g.segments.push_back(s);
      g.source_ids.push_back(s.id);
      g.next_id = std::max(g.next_id, s.id + 1);
    }
    return g;
  }

  Point2& endpoint(const EndpointRef& e) { return e.end == 0 ? segments[e.seg].p1 : segments[e.seg].p2; }
  const Point2& endpoint(const EndpointRef& e) const {
    return e.end == 0 ? segments[e.seg].p1 : segments[e.seg].p2;
  }

  bool connected(const EndpointRef& e) const {
    return std::any_of(links.begin(), links.end(),
                       [&](const CornerLink& l) { return l.from == e || l.to == e; });
  }

  void link(const EndpointRef& a, const EndpointRef& b) { links.push_back({a, b}); }

  /// Splits segment i at x. Piece [p1, x] stays at i, [x, p2] is appended.
  /// Returns the index of the appended piece.
  std::size_t split(std::size_t i, const Point2& x) {
    LineSegment tail = segments[i];
    tail.p1 = x;
    tail.id = next_id++;
    segments[i].p2 = x;
    segments.push_back(tail);
    source_ids.push_back(source_ids[i]);
    const std::size_t j = segments.size() - 1;
    for (auto& l : links) {
      for (EndpointRef* e : {&l.from, &l.to})
        if (e->seg == i && e->end == 1) e->seg = j;
    }
    return j;
  }
};

namespace detail {

inline bool non_parallel(const LineSegment& a, const LineSegment& b, const SegConfig& cfg) {
  return undirected_angle(a, b) > cfg.parallel_angle;
}

inline double signed_side(const Point2& p, const LineSegment& s) { return dot(s.normal, p - s.p1); }

/// Position of x along s as a fraction of its length.
inline double along(const LineSegment& s, const Point2& x) {
  const Point2 d = s.p2 - s.p1;
  return dot(x - s.p1, d) / dot(d, d);
}

/// Endpoint of `s` closest to segment `target`.
inline int closest_end_to(const LineSegment& s, const LineSegment& target) {
  return segment_point_distance(s.p1, target) <= segment_point_distance(s.p2, target) ? 0 : 1;
}

inline const Point2& end_point(const LineSegment& s, int end) { return end == 0 ? s.p1 : s.p2; }

/// Split point of l1 by the supporting line of l2 through its endpoint `end`,
/// if it lies on l1 at least min_length from both ends and l2 extends past
/// `end` towards it.
inline std::optional<Point2> split_point(const LineSegment& l1, const LineSegment& l2, int end,
                                         const SegConfig& cfg) {
  const Point2& e = end_point(l2, end);
  const Point2& other = end_point(l2, 1 - end);
  const auto x = line_line_intersection(l1.p1, l1.p2, l2.p1, l2.p2);
  if (!x) return std::nullopt;
  const double t = along(l1, *x);
  if (t < 0.0 || t > 1.0) return std::nullopt;
  if (distance(*x, l1.p1) < cfg.min_length || distance(*x, l1.p2) < cfg.min_length) return std::nullopt;
  if (dot(*x - e, e - other) < -1e-9) return std::nullopt;
  // l2 must stand on the free-space side of l1.
  if (signed_side(other, l1) <= 0.0) return std::nullopt;
  return x;
}

}  // namespace detail

/// Joins close endpoints of non-parallel segments into a common corner at the
/// intersection of their supporting lines. Returns the number of corners made.
inline int connect_corners(SegmentGraph& g, const SegConfig& cfg) {
  int made = 0;
  const std::size_t n = g.segments.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const LineSegment& a = g.segments[i];
      const LineSegment& b = g.segments[j];
      if (!detail::non_parallel(a, b, cfg)) continue;
      EndpointRef ea{i, 0}, eb{j, 0};
      double best = std::numeric_limits<double>::infinity();
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
          const double d = distance(detail::end_point(a, u), detail::end_point(b, v));
          if (d < best) {
            best = d;
            ea = {i, u};
            eb = {j, v};
          }
        }
      if (!(best < cfg.corner_threshold)) continue;
      if (best == 0.0 && std::any_of(g.links.begin(), g.links.end(), [&](const CornerLink& l) {
            return (l.from == ea && l.to == eb) || (l.from == eb && l.to == ea);
          }))
        continue;
      if (g.connected(ea) || g.connected(eb)) continue;
      const auto corner = line_line_intersection(a.p1, a.p2, b.p1, b.p2);
      if (!corner) continue;
      if (distance(*corner, g.endpoint(ea)) >= cfg.corner_threshold ||
          distance(*corner, g.endpoint(eb)) >= cfg.corner_threshold)
        continue;
      // Both normals face the other segment, or both face away from it.
      const double sa = detail::signed_side(b.midpoint(), a);
      const double sb = detail::signed_side(a.midpoint(), b);
      if (!((sa > 0.0 && sb > 0.0) || (sa < 0.0 && sb < 0.0))) continue;
      const Point2 keep_a = detail::end_point(a, 1 - ea.end);
      const Point2 keep_b = detail::end_point(b, 1 - eb.end);
      if (distance(*corner, keep_a) < 1e-6 || distance(*corner, keep_b) < 1e-6) continue;
      if (dot(*corner - keep_a, g.endpoint(ea) - keep_a) <= 0.0) continue;
      if (dot(*corner - keep_b, g.endpoint(eb) - keep_b) <= 0.0) continue;
      g.endpoint(ea) = *corner;
      g.endpoint(eb) = *corner;
      g.link(ea, eb);
      ++made;
    }
  }
  return made;
}

/// Splits l1 where a non-parallel l2 with a free endpoint nearly touches it,
/// forming a corner with that endpoint. Returns the number of splits.
inline int split_at_corner(SegmentGraph& g, const SegConfig& cfg) {
  int made = 0;
  for (std::size_t i = 0; i < g.segments.size(); ++i) {
    for (std::size_t j = 0; j < g.segments.size(); ++j) {
      if (i == j) continue;
      const LineSegment l1 = g.segments[i];
      const LineSegment l2 = g.segments[j];
      if (!detail::non_parallel(l1, l2, cfg)) continue;
      const int end = detail::closest_end_to(l2, l1);
      const EndpointRef e{j, end};
      if (g.connected(e)) continue;
      const Point2 ep = detail::end_point(l2, end);
      if (!(segment_point_distance(ep, l1) < cfg.corner_threshold)) continue;
      const auto x = detail::split_point(l1, l2, end, cfg);
      if (!x || distance(*x, ep) >= cfg.corner_threshold) continue;
      const std::size_t tail = g.split(i, *x);
      g.endpoint(e) = *x;
      g.link({i, 1}, e);
      g.link({tail, 0}, e);
      ++made;
    }
  }
  return made;
}

/// Splits l1 where the extension of a non-parallel l2 crosses it with a gap
/// of doorway width; the two new endpoints are linked to each other.
inline int split_at_doorway(SegmentGraph& g, const SegConfig& cfg) {
  int made = 0;
  for (std::size_t i = 0; i < g.segments.size(); ++i) {
    for (std::size_t j = 0; j < g.segments.size(); ++j) {
      if (i == j) continue;
      const LineSegment l1 = g.segments[i];
      const LineSegment l2 = g.segments[j];
      if (!detail::non_parallel(l1, l2, cfg)) continue;
      const int end = detail::closest_end_to(l2, l1);
      const double d = segment_point_distance(detail::end_point(l2, end), l1);
      if (d < cfg.doorway_min || d > cfg.doorway_max) continue;
      const auto x = detail::split_point(l1, l2, end, cfg);
      if (!x) continue;
      const std::size_t tail = g.split(i, *x);
      g.link({i, 1}, {tail, 0});
      ++made;
    }
  }
  return made;
}

/// Applies the three processing rules until none of them fires.
inline SegmentGraph process_segments(std::span<const LineSegment> stored, const SegConfig& cfg) {
  SegmentGraph g = SegmentGraph::from_segments(stored);
  for (int iter = 0; iter < 32; ++iter) {
    int changes = connect_corners(g, cfg);
    changes += split_at_corner(g, cfg);
    changes += split_at_doorway(g, cfg);
    if (changes == 0) break;
  }
  return g;
}

// ---------------------------------------------------------------------------
// G^V: visibility graph

enum class EdgeKind { neighbor, passage, visibility };

struct GraphEdge {
  std::size_t i = 0;
  std::size_t j = 0;  // i < j
  double weight = 1.0;
  EdgeKind kind = EdgeKind::visibility;
};

struct VisibilityGraph {
  std::vector<LineSegment> segments;
  std::vector<SegmentId> source_ids;
  std::vector<GraphEdge> edges;

  std::size_t size() const { return segments.size(); }

  Eigen::MatrixXd affinity() const {
    const auto n = static_cast<Eigen::Index>(segments.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) {
      a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.weight;
      a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.weight;
    }
    return a;
  }

  /// Affinity of the subgraph induced by `nodes` (in the given order).
  Eigen::MatrixXd induced_affinity(std::span<const std::size_t> nodes) const {
    std::map<std::size_t, Eigen::Index> pos;
    for (std::size_t k = 0; k < nodes.size(); ++k) pos[nodes[k]] = static_cast<Eigen::Index>(k);
    const auto m = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : edges) {
      auto pi = pos.find(e.i), pj = pos.find(e.j);
      if (pi == pos.end() || pj == pos.end()) continue;
      a(pi->second, pj->second) = e.weight;
      a(pj->second, pi->second) = e.weight;
    }
    return a;
  }

  const GraphEdge* find_edge(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    for (const auto& e : edges)
      if (e.i == i && e.j == j) return &e;
    return nullptr;
  }
};

/// W_ij = exp(-gamma_d d^2) * exp(-gamma_r |x^r_i - x^r_j|) * (|l_i| + |l_j|) / (2 max_len).
inline double edge_weight(const LineSegment& li, const LineSegment& lj, const SegConfig& cfg, double max_len) {
  if (!(max_len > 0.0)) throw Error("edge_weight: max_len must be positive");
  const double d = segment_segment_distance(li, lj);
  const double w_d = std::exp(-cfg.gamma_d * d * d);
  const double w_r = std::exp(-cfg.gamma_r * distance(li.last_robot_pos, lj.last_robot_pos));
  const double w_l = (li.length() + lj.length()) / (2.0 * max_len);
  return w_d * w_r * w_l;
}

namespace detail {

inline bool collinear_pair(const LineSegment& a, const LineSegment& b, const SegConfig& cfg) {
  if (undirected_angle(a, b) > cfg.collinear_angle) return false;
  auto off = [](const LineSegment& r, const LineSegment& o) {
    return std::max(std::abs(signed_side(o.p1, r)), std::abs(signed_side(o.p2, r)));
  };
  return std::max(off(a, b), off(b, a)) <= cfg.collinear_offset;
}

/// Gap between two collinear segments along a's direction (negative on overlap).
inline double collinear_gap(const LineSegment& a, const LineSegment& b) {
  const Point2 d = a.direction();
  const double b0 = dot(d, b.p1 - a.p1), b1 = dot(d, b.p2 - a.p1);
  return std::max(std::min(b0, b1) - a.length(), 0.0 - std::max(b0, b1));
}

/// True when c's midpoint projects strictly between collinear a and b.
inline bool between_on_line(const LineSegment& a, const LineSegment& b, const LineSegment& c) {
  const Point2 d = a.direction();
  const double a0 = 0.0, a1 = a.length();
  const double b0 = dot(d, b.p1 - a.p1), b1 = dot(d, b.p2 - a.p1);
  const double lo = std::min(std::max(a0, a1), std::max(b0, b1));
  const double hi = std::max(std::min(a0, a1), std::min(b0, b1));
  const double t = dot(d, c.midpoint() - a.p1);
  return t > std::min(lo, hi) && t < std::max(lo, hi);
}

}  // namespace detail

inline VisibilityGraph build_visibility_graph(const SegmentGraph& gd, const SegConfig& cfg) {
  VisibilityGraph gv;
  gv.segments = gd.segments;
  gv.source_ids = gd.source_ids;
  const std::size_t n = gv.segments.size();
  std::map<std::pair<std::size_t, std::size_t>, GraphEdge> edges;
  auto add = [&](std::size_t i, std::size_t j, double w, EdgeKind kind) {
    if (i == j) return;
    if (i > j) std::swap(i, j);
    auto it = edges.find({i, j});
    if (it == edges.end()) {
      edges[{i, j}] = GraphEdge{i, j, w, kind};
    } else if (kind != EdgeKind::visibility && it->second.kind == EdgeKind::visibility) {
      it->second = GraphEdge{i, j, w, kind};
    }
  };

  for (const auto& l : gd.links) add(l.from.seg, l.to.seg, 1.0, EdgeKind::neighbor);

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = gv.segments[i];
      const auto& b = gv.segments[j];
      if (dot(a.normal, b.normal) <= 0.0 || !detail::collinear_pair(a, b, cfg)) continue;
      const double gap = detail::collinear_gap(a, b);
      if (gap < cfg.doorway_min || gap > cfg.doorway_max) continue;
      // Only consecutive pieces: no other collinear piece inside the opening.
      bool filled = false;
      for (std::size_t k = 0; k < n && !filled; ++k) {
        if (k == i || k == j) continue;
        const auto& c = gv.segments[k];
        if (dot(a.normal, c.normal) <= 0.0 || !detail::collinear_pair(a, c, cfg)) continue;
        filled = detail::collinear_gap(a, c) < 0.0 || detail::collinear_gap(b, c) < 0.0 ||
                 detail::between_on_line(a, b, c);
      }
      if (!filled) add(i, j, 1.0, EdgeKind::passage);
    }

  double max_len = 0.0;
  for (const auto& s : gv.segments) max_len = std::max(max_len, s.length());

  std::vector<std::size_t> la, lb;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& li = gv.segments[i];
    la.clear();
    lb.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto& lj = gv.segments[j];
      if (segment_segment_distance(li, lj) > cfg.visibility_radius) continue;
      if (half_plane_side(lj.p1, li) != Side::positive && half_plane_side(lj.p2, li) != Side::positive)
        continue;
      la.push_back(j);
      if (half_plane_side(lj.midpoint(), li) == Side::positive &&
          half_plane_side(li.midpoint(), lj) == Side::positive)
        lb.push_back(j);
    }
    for (std::size_t j : lb) {
      const Point2 from = li.midpoint();
      const Point2 to = gv.segments[j].midpoint();
      bool blocked = false;
      for (std::size_t o : la) {
        if (o == j) continue;
        const auto& lo = gv.segments[o];
        if (segments_intersect(from, to, lo.p1, lo.p2).point) {
          blocked = true;
          break;
        }
      }
      if (!blocked) add(i, j, edge_weight(li, gv.segments[j], cfg, max_len), EdgeKind::visibility);
    }
  }
  for (const auto& [key, e] : edges) gv.edges.push_back(e);
  return gv;
}

// ---------------------------------------------------------------------------
// Rooms

namespace detail {

/// Length-weighted overlap of fresh clusters with previous room ids, mapped
/// greedily one-to-one; unmatched clusters get new ids.
inline std::vector<RoomId> map_clusters_to_rooms(std::span<const int> fresh, std::span<const RoomId> previous,
                                                 std::span<const LineSegment> segs, RoomId& next_room_id) {
  std::map<std::pair<int, RoomId>, double> overlap;
  std::set<int> clusters;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (fresh[i] < 0) continue;
    clusters.insert(fresh[i]);
    if (previous[i] >= 0) overlap[{fresh[i], previous[i]}] += segs[i].length();
  }
  std::vector<std::pair<double, std::pair<int, RoomId>>> order;
  for (const auto& [key, w] : overlap) order.push_back({w, key});
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::map<int, RoomId> assigned;
  std::set<RoomId> used;
  for (const auto& [w, key] : order) {
    if (assigned.count(key.first) || used.count(key.second)) continue;
    assigned[key.first] = key.second;
    used.insert(key.second);
  }
  for (int c : clusters)
    if (!assigned.count(c)) assigned[c] = next_room_id++;
  std::vector<RoomId> out(fresh.size(), -1);
  for (std::size_t i = 0; i < fresh.size(); ++i)
    if (fresh[i] >= 0) out[i] = assigned[fresh[i]];
  return out;
}

/// Gives unlabeled segments the label of their nearest labeled segment.
inline void fill_unlabeled(std::vector<RoomId>& labels, std::span<const LineSegment> segs, RoomId fallback) {
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) labeled.push_back(i);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) continue;
    if (labeled.empty()) {
      labels[i] = fallback;
      continue;
    }
    std::size_t best = labeled.front();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t j : labeled) {
      const double d = segment_segment_distance(segs[i], segs[j]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    labels[i] = labels[best];
  }
}

}  // namespace detail

namespace detail {

/// Opening between two collinear pieces: their two closest endpoints.
inline std::pair<Point2, Point2> opening_between(const LineSegment& a, const LineSegment& b) {
  std::pair<Point2, Point2> best{a.p1, b.p1};
  double d = distance(a.p1, b.p1);
  for (const Point2& p : {a.p1, a.p2})
    for (const Point2& q : {b.p1, b.p2})
      if (distance(p, q) < d) {
        d = distance(p, q);
        best = {p, q};
      }
  return best;
}

}  // namespace detail

/// Room adjacency. Rooms are adjacent when a neighbor or passage edge joins
/// them, when they own the two faces of one doorway, or when a sightline
/// between them passes through exactly one doorway. A doorway is the opening
/// of a passage edge; the openings on the two faces of a thick wall are one
/// doorway.
inline std::set<std::pair<RoomId, RoomId>> room_connectivity(const VisibilityGraph& gv, std::span<const RoomId> labels,
                                                             const SegConfig& cfg = {}) {
  std::set<std::pair<RoomId, RoomId>> out;
  std::vector<std::pair<Point2, Point2>> openings;
  std::vector<RoomId> opening_room;
  for (const auto& e : gv.edges) {
    if (e.kind == EdgeKind::passage) {
      openings.push_back(detail::opening_between(gv.segments[e.i], gv.segments[e.j]));
      opening_room.push_back(labels[e.i]);
    }
    if (e.kind == EdgeKind::visibility) continue;
    const RoomId a = labels[e.i], b = labels[e.j];
    if (a != b) out.insert({std::min(a, b), std::max(a, b)});
  }
  // Group openings into doorways by midpoint proximity.
  std::vector<int> doorway(openings.size(), -1);
  int n_doorways = 0;
  const double same = 0.5 * cfg.doorway_min;
  for (std::size_t i = 0; i < openings.size(); ++i) {
    if (doorway[i] >= 0) continue;
    doorway[i] = n_doorways++;
    const Point2 mi = (openings[i].first + openings[i].second) * 0.5;
    for (std::size_t j = i + 1; j < openings.size(); ++j)
      if (doorway[j] < 0 && distance(mi, (openings[j].first + openings[j].second) * 0.5) < same) {
        doorway[j] = doorway[i];
        const RoomId a = opening_room[i], b = opening_room[j];
        if (a != b) out.insert({std::min(a, b), std::max(a, b)});
      }
  }
  if (openings.empty()) return out;
  std::set<int> crossed;
  for (const auto& e : gv.edges) {
    if (e.kind != EdgeKind::visibility) continue;
    const RoomId a = labels[e.i], b = labels[e.j];
    if (a == b || out.count({std::min(a, b), std::max(a, b)})) continue;
    const Point2 from = gv.segments[e.i].midpoint(), to = gv.segments[e.j].midpoint();
    crossed.clear();
    for (std::size_t o = 0; o < openings.size(); ++o)
      if (segments_intersect(from, to, openings[o].first, openings[o].second).point) crossed.insert(doorway[o]);
    if (crossed.size() == 1) out.insert({std::min(a, b), std::max(a, b)});
  }
  return out;
}

/// Labels of the previous snapshot carried onto the current segments: each
/// piece inherits from the previous piece of the same stored segment that
/// overlaps it most.
inline std::vector<RoomId> carry_labels(const RoomSet& prev, const VisibilityGraph& gv) {
  std::vector<RoomId> out(gv.size(), -1);
  for (std::size_t i = 0; i < gv.size(); ++i) {
    const auto& s = gv.segments[i];
    const Point2 d = s.direction();
    const double s0 = 0.0, s1 = s.length();
    double best = 0.0;
    for (std::size_t j = 0; j < prev.segments.size(); ++j) {
      if (prev.source_ids[j] != gv.source_ids[i]) continue;
      const auto& p = prev.segments[j];
      const double a = dot(d, p.p1 - s.p1), b = dot(d, p.p2 - s.p1);
      const double ov = std::min(s1, std::max(a, b)) - std::max(s0, std::min(a, b));
      if (ov > best) {
        best = ov;
        out[i] = prev.labels[j];
      }
    }
  }
  return out;
}

struct UpdateReport {
  int k_estimate = 0;
  bool reclustered = false;
  bool split_tested = false;
  bool split_accepted = false;
  double fiedler = -1.0;
  double edge_ratio = -1.0;
  RoomId current_room = -1;
};

/// One segmentation step on a fresh G^V, given the previous snapshot and the
/// robot position.
inline RoomSet incremental_update(const RoomSet& prev, const VisibilityGraph& gv, const Point2& robot_pos,
                                  const SegConfig& cfg, UpdateReport* report = nullptr) {
  UpdateReport rep;
  RoomSet next;
  next.segments = gv.segments;
  next.source_ids = gv.source_ids;
  next.next_room_id = prev.next_room_id;
  next.k_old = prev.k;
  const std::size_t n = gv.size();
  if (n == 0) {
    next.k = 0;
    if (report) *report = rep;
    return next;
  }

  std::vector<RoomId> carried = carry_labels(prev, gv);
  int k_old = prev.k;
  if (k_old == 0) {
    // The first room exists before any clustering.
    const RoomId first = next.next_room_id++;
    std::fill(carried.begin(), carried.end(), first);
    k_old = 1;
  }
  next.k_old = k_old;

  const Eigen::MatrixXd a = gv.affinity();
  const spectral::ClusterResult full = spectral::spectral_cluster(a, cfg.k_max);
  const int k = full.k;
  rep.k_estimate = k;

  std::vector<RoomId> labels;
  if (k < k_old) {
    rep.reclustered = true;
    const auto re = spectral::spectral_cluster(a, cfg.k_max, k);
    labels = detail::map_clusters_to_rooms(re.labels, carried, gv.segments, next.next_room_id);
  } else {
    const auto same = k == k_old ? full : spectral::spectral_cluster(a, cfg.k_max, k_old);
    labels = detail::map_clusters_to_rooms(same.labels, carried, gv.segments, next.next_room_id);
  }
  detail::fill_unlabeled(labels, gv.segments, carried.front() >= 0 ? carried.front() : 0);

  if (k > k_old) {
    const RoomIndex index(RoomSet{gv.segments, gv.source_ids, labels, 0, 0, {}, 0});
    const RoomId cur = index.locate(robot_pos);
    rep.current_room = cur;
    // Local subgraph of the current room; isolated nodes carry no structure.
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == cur) nodes.push_back(i);
    std::erase_if(nodes, [&](std::size_t i) {
      for (std::size_t j : nodes)
        if (j != i && a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) return false;
      return true;
    });
    if (nodes.size() >= 2) {
      const Eigen::MatrixXd sub = gv.induced_affinity(nodes);
      rep.split_tested = true;
      rep.fiedler = spectral::fiedler_value(sub);
      if (rep.fiedler < cfg.fiedler_threshold) {
        auto two = spectral::spectral_cluster(sub, cfg.k_max, 2);
        std::vector<LineSegment> sub_segs;
        for (auto i : nodes) sub_segs.push_back(gv.segments[i]);
        std::vector<RoomId> part(two.labels.begin(), two.labels.end());
        detail::fill_unlabeled(part, sub_segs, 0);
        std::size_t size0 = 0, size1 = 0;
        for (RoomId p : part) (p == 0 ? size0 : size1)++;
        if (size0 > 0 && size1 > 0) {
          std::set<std::size_t> side1;
          for (std::size_t t = 0; t < nodes.size(); ++t)
            if (part[t] == 1) side1.insert(nodes[t]);
          std::set<std::size_t> in_room(nodes.begin(), nodes.end());
          int between = 0;
          for (const auto& e : gv.edges)
            if (in_room.count(e.i) && in_room.count(e.j) && (side1.count(e.i) != side1.count(e.j))) ++between;
          rep.edge_ratio = static_cast<double>(between) / static_cast<double>(std::min(size0, size1));
          if (rep.edge_ratio < cfg.edge_ratio_threshold) {
            rep.split_accepted = true;
            // The larger part keeps the room id.
            const int moved = size1 <= size0 ? 1 : 0;
            const RoomId fresh = next.next_room_id++;
            for (std::size_t t = 0; t < nodes.size(); ++t)
              if (part[t] == moved) labels[nodes[t]] = fresh;
          }
        }
      }
    }
  }

  next.labels = std::move(labels);
  next.k = static_cast<int>(next.room_ids().size());
  next.connectivity = room_connectivity(gv, next.labels, cfg);
  if (report) *report = rep;
  return next;
}

/// Stateful driver: processes the stored segments and advances the snapshot.
class RoomSegmenter {
 public:
  explicit RoomSegmenter(SegConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const RoomSet& update(std::span<const LineSegment> stored, const Point2& robot_pos) {
    graph_ = build_visibility_graph(process_segments(stored, cfg_), cfg_);
    state_ = incremental_update(state_, graph_, robot_pos, cfg_, &last_report_);
    return state_;
  }

  const RoomSet& state() const { return state_; }
  const VisibilityGraph& graph() const { return graph_; }
  const UpdateReport& last_report() const { return last_report_; }
  const SegConfig& config() const { return cfg_; }

 private:
  SegConfig cfg_;
  RoomSet state_;
  VisibilityGraph graph_;
  UpdateReport last_report_;
};

}  // namespace roomgp
