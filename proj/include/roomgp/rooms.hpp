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
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "roomgp/geometry.hpp"

namespace roomgp {

using RoomId = int;

/// Snapshot of the room partition over the processed wall segments.
struct RoomSet {
  std::vector<LineSegment> segments;   // processed segments, graph node order
  std::vector<SegmentId> source_ids;   // id of the stored segment each piece came from
  std::vector<RoomId> labels;          // room of each segment
  int k = 0;                           // number of rooms
  int k_old = 0;                       // number of rooms before the last update
  std::set<std::pair<RoomId, RoomId>> connectivity;  // (a, b) with a < b
  RoomId next_room_id = 0;

  std::map<RoomId, std::vector<std::size_t>> rooms() const {
    std::map<RoomId, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
    return out;
  }

  std::vector<RoomId> room_ids() const {
    std::set<RoomId> ids(labels.begin(), labels.end());
    return {ids.begin(), ids.end()};
  }

  std::vector<LineSegment> room_segments(RoomId id) const {
    std::vector<LineSegment> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == id) out.push_back(segments[i]);
    return out;
  }

  std::vector<RoomId> neighbors(RoomId id) const {
    std::vector<RoomId> out;
    for (const auto& [a, b] : connectivity) {
      if (a == id) out.push_back(b);
      if (b == id) out.push_back(a);
    }
    return out;
  }

  /// Every segment carries a label and k matches the number of distinct labels.
  bool is_partition() const {
    if (labels.size() != segments.size()) return false;
    if (std::any_of(labels.begin(), labels.end(), [](RoomId r) { return r < 0; })) return false;
    return static_cast<int>(room_ids().size()) == k;
  }
};

}  // namespace roomgp
