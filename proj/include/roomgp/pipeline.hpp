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
 * pipeline.hpp
 *
 * Frame loop for the three mapping variants:
 *
 *   standard_global  one zero-mean GP over every scan point
 *   line_global      one GP whose prior holds all stored lines; residual
 *                    points only
 *   room_based       one GP per room, prior = the room's segments; residual
 *                    clusters routed to rooms through the room index
 *
 * Per frame: cluster -> extract -> merge lines -> (segment rooms) -> update
 * models -> time a fixed prediction batch.
 */

#pragma once

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "roomgp/config.hpp"
#include "roomgp/gpedf.hpp"
#include "roomgp/line_extraction.hpp"
#include "roomgp/metrics.hpp"
#include "roomgp/room_index.hpp"
#include "roomgp/room_segmentation.hpp"
#include "roomgp/world_sim.hpp"

namespace roomgp {

struct FrameMetrics {
  std::int64_t frame = 0;
  std::size_t n_points = 0;  // cumulative scan points
  double update_ms = 0.0;
  double predict_ms = 0.0;
  double segmentation_ms = 0.0;
  int n_rooms = 0;
  std::size_t n_inducing = 0;
  std::size_t n_segments = 0;
};

inline constexpr const char* kMetricsHeader =
    "variant,frame,n_points,update_ms,predict_ms,segmentation_ms,n_rooms,n_inducing,n_segments";

inline std::string csv_row(Variant v, const FrameMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%lld,%zu,%.6f,%.6f,%.6f,%d,%zu,%zu", to_string(v),
                static_cast<long long>(m.frame), m.n_points, m.update_ms, m.predict_ms, m.segmentation_ms,
                m.n_rooms, m.n_inducing, m.n_segments);
  return buf;
}

/// Fixed query batch: uniform over the plan's bounding box, rejecting points
/// within 0.05 m of a wall.
inline std::vector<Point2> prediction_points(const FloorPlan& plan, int count, std::uint64_t seed) {
  std::vector<LineSegment> walls;
  for (const auto& w : plan.walls) walls.push_back(make_segment(w.p1, w.p2));
  const Aabb box = bounding_box(walls);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> ux(box.min.x, box.max.x), uy(box.min.y, box.max.y);
  std::vector<Point2> out;
  while (static_cast<int>(out.size()) < count) {
    const Point2 p{ux(rng), uy(rng)};
    bool near_wall = false;
    for (const auto& w : plan.walls)
      if (point_segment_distance(p, w.p1, w.p2) < 0.05) near_wall = true;
    if (!near_wall) out.push_back(p);
  }
  return out;
}

class Pipeline {
 public:
  Pipeline(RunConfig cfg, std::vector<Point2> query_points = {})
      : cfg_(std::move(cfg)), segmenter_(cfg_.seg), queries_(std::move(query_points)) {
    cfg_.gp.validate();
    if (cfg_.variant != Variant::room_based) models_.emplace(0, GpEdfModel(cfg_.gp, 0));
  }

  const RunConfig& config() const { return cfg_; }
  Variant variant() const { return cfg_.variant; }
  const std::vector<LineSegment>& stored_lines() const { return stored_; }
  const RoomSet& rooms() const { return segmenter_.state(); }
  const RoomSegmenter& segmenter() const { return segmenter_; }
  const std::map<RoomId, GpEdfModel>& models() const { return models_; }
  const RoomIndex& index() const { return index_; }
  const std::vector<Point2>& residual_points() const { return residuals_; }
  const Pose& robot() const { return robot_; }
  const std::vector<FrameMetrics>& metrics() const { return metrics_; }

  std::size_t n_inducing() const {
    std::size_t n = 0;
    for (const auto& [id, m] : models_) n += m.size();
    return n;
  }

  /// The model answering queries at p; null before the first room exists.
  const GpEdfModel* model_at(const Point2& p) const {
    if (models_.empty()) return nullptr;
    if (cfg_.variant != Variant::room_based) return &models_.begin()->second;
    if (index_.empty()) return nullptr;
    auto it = models_.find(index_.locate(p));
    return it == models_.end() ? nullptr : &it->second;
  }

  std::optional<DistanceQuery> query(const Point2& p) const {
    const GpEdfModel* m = model_at(p);
    if (!m) return std::nullopt;
    return m->query_distance(p);
  }

  const FrameMetrics& step(const ScanFrame& frame) {
    using Clock = std::chrono::steady_clock;
    auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
    FrameMetrics fm;
    fm.frame = frame.index;
    robot_ = frame.pose;
    n_points_ += frame.points.size();
    fm.n_points = n_points_;

    std::vector<LineSegment> fresh;
    std::vector<PointCluster> residual_clusters;
    if (cfg_.variant != Variant::standard_global) {
      for (const auto& c : cluster_scan_points(frame, cfg_.lines)) {
        const auto ex = extract_segments(c, cfg_.lines);
        fresh.insert(fresh.end(), ex.segments.begin(), ex.segments.end());
        PointCluster rc{{}, c.frame_pose, c.cluster_id};
        for (const auto& [p, id] : ex.residual_points) rc.points.push_back(p);
        if (!rc.points.empty()) residual_clusters.push_back(std::move(rc));
      }
      merge_segments(stored_, fresh, cfg_.lines, next_segment_id_);
    }

    if (cfg_.variant == Variant::room_based) {
      const RoomSet prev = segmenter_.state();
      const auto t0 = Clock::now();
      segmenter_.update(stored_, robot_.position());
      fm.segmentation_ms = ms(Clock::now() - t0);
      const auto t1 = Clock::now();
      reconcile_models(prev);
      route_residuals(residual_clusters);
      fm.update_ms = ms(Clock::now() - t1);
    } else {
      const auto t1 = Clock::now();
      GpEdfModel& model = models_.at(0);
      if (cfg_.variant == Variant::line_global) {
        model.set_lines(stored_);
        std::vector<Point2> pts;
        for (const auto& c : residual_clusters) pts.insert(pts.end(), c.points.begin(), c.points.end());
        absorb(model, pts);
      } else {
        absorb(model, frame.points);
      }
      fm.update_ms = ms(Clock::now() - t1);
    }

    const auto t2 = Clock::now();
    double sink = 0.0;
    for (const auto& q : queries_)
      if (auto d = query(q)) sink += d->distance;
    fm.predict_ms = ms(Clock::now() - t2);
    sink_ += sink;

    fm.n_rooms = cfg_.variant == Variant::room_based ? segmenter_.state().k : 1;
    fm.n_inducing = n_inducing();
    fm.n_segments = cfg_.variant == Variant::room_based   ? segmenter_.state().segments.size()
                    : cfg_.variant == Variant::line_global ? stored_.size()
                                                           : 0;
    metrics_.push_back(fm);
    return metrics_.back();
  }

 private:
  /// Drops points explained by the prior (within prune_radius of a line),
  /// then grows Z and absorbs the rest.
  void absorb(GpEdfModel& model, std::span<const Point2> pts) {
    std::vector<Point2> keep;
    keep.reserve(pts.size());
    for (const auto& p : pts)
      if (model.lines().empty() || min_line_distance(p, model.lines()) > cfg_.gp.prune_radius) keep.push_back(p);
    if (keep.empty()) return;
    model.select_inducing(keep);
    model.update(std::span<const Point2>(keep));
    residuals_.insert(residuals_.end(), keep.begin(), keep.end());
  }

  /// Carries the per-room models across a segmentation step. Old and new
  /// rooms are grouped by id continuity plus segment overlap (new ids inherit
  /// from the old room they overlap most, vanished ids flow into the new room
  /// their segments went to); each group merges its old models and
  /// partitions the result among its new rooms.
  void reconcile_models(const RoomSet& prev) {
    const RoomSet& cur = segmenter_.state();
    const std::vector<RoomId> carried = carry_labels(prev, segmenter_.graph());
    const std::set<RoomId> old_ids(prev.labels.begin(), prev.labels.end());
    const std::vector<RoomId> new_ids_v = cur.room_ids();
    const std::set<RoomId> new_ids(new_ids_v.begin(), new_ids_v.end());

    // Overlap weights between old and new rooms, by segment length.
    std::map<std::pair<RoomId, RoomId>, double> overlap;
    for (std::size_t i = 0; i < cur.segments.size(); ++i)
      if (carried[i] >= 0) overlap[{carried[i], cur.labels[i]}] += cur.segments[i].length();

    // Union-find over old (tagged 0) and new (tagged 1) room ids.
    std::map<std::pair<int, RoomId>, std::pair<int, RoomId>> parent;
    std::function<std::pair<int, RoomId>(std::pair<int, RoomId>)> find = [&](std::pair<int, RoomId> x) {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      return it->second = find(it->second);
    };
    auto unite = [&](std::pair<int, RoomId> a, std::pair<int, RoomId> b) {
      a = find(a);
      b = find(b);
      if (a != b) parent[b] = a;
    };
    for (RoomId o : old_ids) parent[{0, o}] = {0, o};
    for (RoomId n : new_ids) parent[{1, n}] = {1, n};
    for (RoomId n : new_ids)
      if (old_ids.count(n) && models_.count(n)) unite({0, n}, {1, n});
    for (RoomId n : new_ids) {
      if (old_ids.count(n)) continue;
      RoomId best = -1;
      double bw = 0.0;
      for (const auto& [key, w] : overlap)
        if (key.second == n && w > bw) bw = w, best = key.first;
      if (best >= 0) unite({0, best}, {1, n});
    }
    for (RoomId o : old_ids) {
      if (new_ids.count(o)) continue;
      RoomId best = -1;
      double bw = 0.0;
      for (const auto& [key, w] : overlap)
        if (key.first == o && w > bw) bw = w, best = key.second;
      if (best < 0 && !new_ids.empty() && models_.count(o) && !models_.at(o).lines().empty()) {
        // No surviving overlap: send the model to the room holding its box center.
        const Aabb b = bounding_box(models_.at(o).lines());
        best = RoomIndex(cur).locate((b.min + b.max) * 0.5);
      }
      if (best >= 0) unite({0, o}, {1, best});
    }

    std::map<std::pair<int, RoomId>, std::pair<std::vector<RoomId>, std::vector<RoomId>>> groups;
    for (const auto& [node, p] : parent) {
      auto& g = groups[find(node)];
      (node.first == 0 ? g.first : g.second).push_back(node.second);
    }

    std::map<RoomId, GpEdfModel> next;
    for (auto& [root, g] : groups) {
      auto& [olds, news] = g;
      if (news.empty()) continue;  // only possible without any new rooms
      GpEdfModel merged(cfg_.gp, news.front());
      for (RoomId o : olds) {
        auto it = models_.find(o);
        if (it != models_.end()) merged = merge_models(merged, it->second);
      }
      if (news.size() == 1) {
        merged.set_room_id(news.front());
        merged.set_lines(cur.room_segments(news.front()));
        next.emplace(news.front(), std::move(merged));
        continue;
      }
      std::vector<std::vector<LineSegment>> line_groups;
      for (RoomId n : news) line_groups.push_back(cur.room_segments(n));
      auto parts = partition_model(merged, line_groups, news);
      for (std::size_t i = 0; i < news.size(); ++i) {
        parts[i].set_lines(line_groups[i]);
        next.emplace(news[i], std::move(parts[i]));
      }
    }
    models_ = std::move(next);
    index_ = cur.segments.empty() ? RoomIndex() : RoomIndex(cur);
  }

  void route_residuals(const std::vector<PointCluster>& clusters) {
    if (clusters.empty() || index_.empty()) return;
    const RoomSet& cur = segmenter_.state();
    const RoomId here = index_.locate(robot_.position());
    const auto rooms =
        index_.assign_clusters(clusters, here, cur.neighbors(here), robot_.position(), cfg_.scan.max_range);
    std::map<RoomId, std::vector<Point2>> per_room;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      per_room[rooms[i]].insert(per_room[rooms[i]].end(), clusters[i].points.begin(), clusters[i].points.end());
    for (auto& [room, pts] : per_room) absorb(models_.at(room), pts);
  }

  RunConfig cfg_;
  RoomSegmenter segmenter_;
  std::vector<Point2> queries_;
  std::vector<LineSegment> stored_;
  SegmentId next_segment_id_ = 0;
  std::map<RoomId, GpEdfModel> models_;
  RoomIndex index_;
  std::vector<Point2> residuals_;
  std::vector<FrameMetrics> metrics_;
  Pose robot_;
  std::size_t n_points_ = 0;
  double sink_ = 0.0;
};

/// Frames for a config: the recorded log if given, otherwise simulated.
inline std::vector<ScanFrame> load_frames(const RunConfig& cfg, const FloorPlan& plan) {
  if (cfg.scan_log_path) return read_scan_log(*cfg.scan_log_path);
  ScanParams scan = cfg.scan;
  scan.seed = cfg.seed;
  return playback(plan, load_trajectory(cfg.trajectory_path), scan);
}

/// Runs a pipeline over pre-loaded frames; the pipeline is left in its final state.
inline void run_frames(Pipeline& p, std::span<const ScanFrame> frames) {
  for (const auto& f : frames) p.step(f);
}

inline void write_metrics_csv(const std::string& path, Variant v, std::span<const FrameMetrics> rows,
                              bool header = true, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot write metrics '" + path + "'");
  if (header) out << kMetricsHeader << '\n';
  for (const auto& m : rows) out << csv_row(v, m) << '\n';
}

/// Frozen models of a run, as written by `run --snapshot` and read by `query`.
class MapSnapshot {
 public:
  MapSnapshot() = default;

  explicit MapSnapshot(std::map<RoomId, GpEdfModel> models) : models_(std::move(models)) {
    std::map<RoomId, std::vector<LineSegment>> by_room;
    for (const auto& [id, m] : models_)
      if (!m.lines().empty()) by_room[id] = m.lines();
    if (!by_room.empty()) index_ = RoomIndex(by_room);
  }

  const std::map<RoomId, GpEdfModel>& models() const { return models_; }

  /// The single model that answers a query at p.
  const GpEdfModel& model_at(const Point2& p) const {
    if (models_.empty()) throw Error("snapshot holds no models");
    if (models_.size() == 1 || index_.empty()) return models_.begin()->second;
    return models_.at(index_.locate(p));
  }

 private:
  std::map<RoomId, GpEdfModel> models_;
  RoomIndex index_;
};

inline nlohmann::json snapshot_to_json(const Pipeline& p, bool include_cov = false) {
  nlohmann::json rooms = nlohmann::json::array();
  for (const auto& [id, m] : p.models()) rooms.push_back(model_to_json(m, include_cov));
  nlohmann::json conn = nlohmann::json::array();
  if (p.variant() == Variant::room_based)
    for (const auto& [a, b] : p.rooms().connectivity) conn.push_back({a, b});
  return {{"variant", to_string(p.variant())}, {"rooms", rooms}, {"connectivity", conn}};
}

/// Accepts either a snapshot ({"rooms": [...]}) or a single exported model.
inline MapSnapshot snapshot_from_json(const nlohmann::json& j) {
  std::map<RoomId, GpEdfModel> models;
  try {
    if (j.contains("rooms")) {
      for (const auto& r : j.at("rooms")) {
        GpEdfModel m = model_from_json(r);
        const RoomId id = m.room_id();
        if (!models.emplace(id, std::move(m)).second) throw Error("snapshot: duplicate room id " + std::to_string(id));
      }
    } else {
      GpEdfModel m = model_from_json(j);
      const RoomId id = m.room_id();
      models.emplace(id, std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("snapshot: ") + e.what());
  }
  return MapSnapshot(std::move(models));
}

struct BenchSummary {
  Variant variant;
  double update_slope = 0.0;  // log-log slope of update_ms vs n_points
  double final_update_ms = 0.0;
  double seg_median_ms = 0.0;
  double seg_tail_max_ms = 0.0;  // max over the final 10% of frames
};

struct FitRange {
  std::size_t min_points = 1000;
  std::size_t max_points = 20000;
};

/// Update-time slope over frames after the warm-up frame whose point count
/// lies in `range`; segmentation tail = final 10% of frames (rounded up).
inline BenchSummary summarize(Variant v, std::span<const FrameMetrics> rows, FitRange range = {}) {
  BenchSummary s{v};
  std::vector<double> x, y, seg;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    seg.push_back(rows[i].segmentation_ms);
    if (i == 0 || rows[i].n_points < range.min_points || rows[i].n_points > range.max_points) continue;
    x.push_back(static_cast<double>(rows[i].n_points));
    y.push_back(rows[i].update_ms);
  }
  if (x.size() >= 2) s.update_slope = loglog_slope(x, y);
  if (!rows.empty()) s.final_update_ms = rows.back().update_ms;
  if (!seg.empty()) {
    s.seg_median_ms = median(seg);
    const std::size_t tail = (seg.size() + 9) / 10;
    for (std::size_t i = seg.size() - tail; i < seg.size(); ++i) s.seg_tail_max_ms = std::max(s.seg_tail_max_ms, seg[i]);
  }
  return s;
}

}  // namespace roomgp
