#!/usr/bin/env python3
# Copyright 2026 The roomgp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the reference floor plans and trajectories in this directory.

Interior walls are 0.2 m thick; each wall face is labeled with the room it
faces, outer walls are split per room.
"""

import json
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
T = 0.1  # half wall thickness


def wall(x1, y1, x2, y2, room):
    return {"x1": x1, "y1": y1, "x2": x2, "y2": y2, "room": room}


def spans(lo, hi, gaps):
    """[lo, hi] minus the gap intervals, as a list of (a, b)."""
    out, cur = [], lo
    for a, b in sorted(gaps):
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < hi:
        out.append((cur, hi))
    return out


def vertical_partition(x, y0, y1, doors, left_room, right_room):
    """Thick wall at x between y0 and y1 with door intervals; jambs included."""
    walls = []
    for a, b in spans(y0, y1, doors):
        walls.append(wall(x - T, a, x - T, b, left_room(a, b)))
        walls.append(wall(x + T, a, x + T, b, right_room(a, b)))
    for a, b in doors:
        for y in (a, b):
            walls.append(wall(x - T, y, x + T, y, left_room(a, b)))
    return walls


def horizontal_partition(y, x0, x1, doors, below_room, above_room):
    walls = []
    for a, b in spans(x0, x1, doors):
        walls.append(wall(a, y - T, b, y - T, below_room(a, b)))
        walls.append(wall(a, y + T, b, y + T, above_room(a, b)))
    for a, b in doors:
        for x in (a, b):
            walls.append(wall(x, y - T, x, y + T, below_room(a, b)))
    return walls


def path(waypoints, step):
    poses, t = [], 0.0
    for (ax, ay), (bx, by) in zip(waypoints, waypoints[1:]):
        length = math.hypot(bx - ax, by - ay)
        n = max(1, int(round(length / step)))
        theta = math.atan2(by - ay, bx - ax)
        for i in range(n):
            s = i / n
            poses.append({"t": round(t, 3), "x": round(ax + s * (bx - ax), 6),
                          "y": round(ay + s * (by - ay), 6), "theta": round(theta, 6)})
            t += 0.5
    last = waypoints[-1]
    poses.append({"t": round(t, 3), "x": last[0], "y": last[1], "theta": poses[-1]["theta"]})
    return poses


def four_rooms():
    # A=0 bottom-left, B=1 bottom-right, C=2 top-left, D=3 top-right.
    # Partitions cross at (5, 4) forming a closed "+" junction.
    walls = [
        wall(0, 0, 5, 0, 0), wall(5, 0, 10, 0, 1),
        wall(0, 8, 5, 8, 2), wall(5, 8, 10, 8, 3),
        wall(0, 0, 0, 4, 0), wall(0, 4, 0, 8, 2),
        wall(10, 0, 10, 4, 1), wall(10, 4, 10, 8, 3),
    ]
    walls += vertical_partition(5.0, 0.0, 4.0 - T, [(1.5, 2.4)], lambda a, b: 0, lambda a, b: 1)
    walls += vertical_partition(5.0, 4.0 + T, 8.0, [(5.6, 6.5)], lambda a, b: 2, lambda a, b: 3)
    walls += horizontal_partition(4.0, 0.0, 5.0 - T, [(2.0, 2.9)], lambda a, b: 0, lambda a, b: 2)
    walls += horizontal_partition(4.0, 5.0 + T, 10.0, [(7.0, 7.9)], lambda a, b: 1, lambda a, b: 3)
    plan = {"name": "four_rooms", "walls": walls}
    traj = path([(2.5, 2.0), (3.5, 1.95), (6.5, 1.95), (7.45, 2.5), (7.45, 5.5),
                 (6.5, 6.05), (3.5, 6.05), (2.45, 5.5), (2.45, 2.5), (2.5, 2.0)], 0.25)
    return plan, traj


def two_rooms():
    walls = [
        wall(0, 0, 5, 0, 0), wall(5, 0, 10, 0, 1),
        wall(0, 4, 5, 4, 0), wall(5, 4, 10, 4, 1),
        wall(0, 0, 0, 4, 0), wall(10, 0, 10, 4, 1),
    ]
    walls += vertical_partition(5.0, 0.0, 4.0, [(1.5, 2.4)], lambda a, b: 0, lambda a, b: 1)
    plan = {"name": "two_rooms", "walls": walls}
    traj = path([(2.5, 2.0), (3.5, 1.95), (6.5, 1.95), (7.5, 2.0)], 0.25)
    return plan, traj


def corridor_chain(n_rooms=16, n_back=4, width=3.0, height=3.0):
    """Exploration log: new wall (and new inducing support) appears at a
    constant rate while the data grows."""
    total = n_rooms * width
    walls = []
    for r in range(n_rooms):
        x0, x1 = r * width, (r + 1) * width
        walls.append(wall(x0, 0, x1, 0, r))
        walls.append(wall(x0, height, x1, height, r))
    walls.append(wall(0, 0, 0, height, 0))
    walls.append(wall(total, 0, total, height, n_rooms - 1))
    low, high = (0.6, 1.5), (1.5, 2.4)
    for r in range(1, n_rooms):
        # Alternate the door between the lower and upper half.
        door = low if r % 2 else high
        walls += vertical_partition(r * width, 0.0, height, [door],
                                    lambda a, b, r=r: r - 1, lambda a, b, r=r: r)
    plan = {"name": "corridor_chain", "walls": walls}
    # One pose per room on the way out, then back through the last rooms so
    # the map stops growing before the end of the log.
    order = list(range(n_rooms)) + list(range(n_rooms - 2, n_rooms - 2 - n_back, -1))
    traj = []
    for i, r in enumerate(order):
        y = height / 2 + (0.3 if r % 2 else -0.3)
        traj.append({"t": float(i), "x": (r + 0.5) * width, "y": y, "theta": 0.0})
    return plan, traj


def main():
    for name, (plan, traj) in {"four_rooms": four_rooms(), "two_rooms": two_rooms(),
                               "corridor_chain": corridor_chain()}.items():
        (HERE / f"{name}.plan.json").write_text(json.dumps(plan, indent=1) + "\n")
        (HERE / f"{name}.traj.json").write_text(json.dumps(traj, indent=1) + "\n")


if __name__ == "__main__":
    main()
