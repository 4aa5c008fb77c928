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
 * room_index.hpp
 *
 * R-tree over room bounding boxes. Overlaps are resolved by the closest
 * segment of each candidate room: a unique positive-side hit wins, several
 * positive-side hits go to the closest one.
 */

#pragma once

#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "roomgp/geometry.hpp"
#include "roomgp/line_extraction.hpp"
#include "roomgp/rooms.hpp"

namespace roomgp {

class RoomIndex {
 public:
  using BgPoint = boost::geometry::model::point<double, 2, boost::geometry::cs::cartesian>;
  using BgBox = boost::geometry::model::box<BgPoint>;
  using Entry = std::pair<BgBox, RoomId>;

  RoomIndex() = default;

  explicit RoomIndex(const RoomSet& rooms) {
    std::map<RoomId, std::vector<LineSegment>> by_room;
    for (std::size_t i = 0; i < rooms.segments.size(); ++i) by_room[rooms.labels[i]].push_back(rooms.segments[i]);
    build(by_room);
  }

  explicit RoomIndex(const std::map<RoomId, std::vector<LineSegment>>& by_room) { build(by_room); }

  std::size_t size() const { return tree_.size(); }
  bool empty() const { return tree_.empty(); }

  const Aabb& box(RoomId id) const { return boxes_.at(id); }
  const std::vector<LineSegment>& segments(RoomId id) const { return segments_.at(id); }
  bool contains_room(RoomId id) const { return boxes_.count(id) > 0; }

  std::vector<RoomId> rooms_containing(const Point2& p) const {
    std::vector<Entry> hits;
    tree_.query(boost::geometry::index::intersects(BgPoint(p.x, p.y)), std::back_inserter(hits));
    std::vector<RoomId> out;
    for (const auto& h : hits) out.push_back(h.second);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Room of a position. Total: points outside every box fall back to the
  /// nearest box(es).
  RoomId locate(const Point2& p) const {
    if (empty()) throw Error("locate on an empty room index");
    std::vector<RoomId> cands = rooms_containing(p);
    if (cands.size() == 1) return cands.front();
    if (cands.empty()) cands = nearest_boxes(p);
    return resolve(p, cands);
  }

  /// Tie-break among candidate rooms by their closest segments to p.
  RoomId resolve(const Point2& p, std::span<const RoomId> candidates) const {
    if (candidates.empty()) throw Error("resolve: no candidate rooms");
    if (candidates.size() == 1) return candidates.front();
    RoomId best_pos = -1, best_any = -1;
    double best_pos_d = std::numeric_limits<double>::infinity();
    double best_any_d = best_pos_d;
    int positives = 0;
    for (RoomId r : candidates) {
      const auto& segs = segments_.at(r);
      const LineSegment* closest = nullptr;
      double cd = std::numeric_limits<double>::infinity();
      for (const auto& s : segs) {
        const double d = segment_point_distance(p, s);
        if (d < cd) {
          cd = d;
          closest = &s;
        }
      }
      if (!closest) continue;
      if (cd < best_any_d) {
        best_any_d = cd;
        best_any = r;
      }
      if (half_plane_side(p, *closest) == Side::positive) {
        ++positives;
        if (cd < best_pos_d) {
          best_pos_d = cd;
          best_pos = r;
        }
      }
    }
    if (positives >= 1) return best_pos;
    return best_any;
  }

  std::vector<RoomId> nearest_boxes(const Point2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, b] : boxes_) best = std::min(best, b.distance_to(p));
    std::vector<RoomId> out;
    for (const auto& [id, b] : boxes_)
      if (b.distance_to(p) <= best + 1e-9) out.push_back(id);
    return out;
  }

  /// Room for each residual cluster, by centroid. Candidates are the sensor's
  /// room plus its connected rooms whose box meets the sensor-range disc.
  std::vector<RoomId> assign_clusters(std::span<const PointCluster> clusters, RoomId sensor_room,
                                      std::span<const RoomId> sensor_room_neighbors, const Point2& sensor_pos,
                                      double max_range) const {
    std::vector<RoomId> cands;
    if (contains_room(sensor_room)) cands.push_back(sensor_room);
    for (RoomId r : sensor_room_neighbors)
      if (contains_room(r) && boxes_.at(r).intersects_disc(sensor_pos, max_range)) cands.push_back(r);
    if (cands.empty()) cands.push_back(locate(sensor_pos));
    std::vector<RoomId> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) out.push_back(assign_point(centroid(c), cands));
    return out;
  }

  RoomId assign_point(const Point2& p, std::span<const RoomId> cands) const {
    std::vector<RoomId> inside;
    for (RoomId r : cands)
      if (boxes_.at(r).contains(p)) inside.push_back(r);
    if (inside.size() == 1) return inside.front();
    if (inside.empty()) return resolve(p, cands);
    return resolve(p, inside);
  }

  static Point2 centroid(const PointCluster& c) {
    if (c.points.empty()) throw Error("centroid of an empty cluster");
    Point2 s{0.0, 0.0};
    for (const auto& p : c.points) s = s + p;
    return s * (1.0 / static_cast<double>(c.points.size()));
  }

 private:
  void build(const std::map<RoomId, std::vector<LineSegment>>& by_room) {
    std::vector<Entry> entries;
    for (const auto& [id, segs] : by_room) {
      if (segs.empty()) throw Error("room " + std::to_string(id) + " has no segments");
      const Aabb b = bounding_box(segs);
      boxes_[id] = b;
      segments_[id] = segs;
      entries.emplace_back(BgBox(BgPoint(b.min.x, b.min.y), BgPoint(b.max.x, b.max.y)), id);
    }
    tree_ = Tree(entries);
  }

  using Tree = boost::geometry::index::rtree<Entry, boost::geometry::index::rstar<16>>;
  Tree tree_;
  std::map<RoomId, Aabb> boxes_;
  std::map<RoomId, std::vector<LineSegment>> segments_;
};

}  // namespace roomgp
