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
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "roomgp/geometry.hpp"
#include "roomgp/rooms.hpp"
#include "roomgp/world_sim.hpp"

namespace roomgp {

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("adjusted_rand_index: label vectors differ in length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_r = 0.0, sum_c = 0.0;
  for (const auto& [key, v] : table) index += c2(v);
  for (const auto& [key, v] : rows) sum_r += c2(v);
  for (const auto& [key, v] : cols) sum_c += c2(v);
  const double expected = sum_r * sum_c / c2(n);
  const double max_index = 0.5 * (sum_r + sum_c);
  // Both labelings trivial (all-in-one or all-singletons): identical partitions.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

struct SegmentationQuality {
  int k = 0;
  double ari = 0.0;
  std::vector<int> truth;  // ground-truth room per segment
};

/// Ground-truth room of each segment: the labeled wall closest to its midpoint.
inline std::vector<int> ground_truth_labels(std::span<const LineSegment> segs, const FloorPlan& plan) {
  if (!plan.has_room_labels()) throw Error("segmentation_quality: floor plan carries no room labels");
  std::vector<int> out;
  out.reserve(segs.size());
  for (const auto& s : segs) {
    const Point2 m = s.midpoint();
    double best = std::numeric_limits<double>::infinity();
    int room = -1;
    for (const auto& w : plan.walls) {
      const double d = point_segment_distance(m, w.p1, w.p2);
      if (d < best) {
        best = d;
        room = *w.room;
      }
    }
    out.push_back(room);
  }
  return out;
}

inline SegmentationQuality segmentation_quality(const RoomSet& rooms, const FloorPlan& plan) {
  SegmentationQuality q;
  q.k = rooms.k;
  q.truth = ground_truth_labels(rooms.segments, plan);
  q.ari = adjusted_rand_index(rooms.labels, q.truth);
  return q;
}

/// Least-squares slope of log(y) against log(x) over pairs with x, y > 0.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("loglog_slope: size mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw Error("loglog_slope: need at least two positive samples");
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace roomgp
