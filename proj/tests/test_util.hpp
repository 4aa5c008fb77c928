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

// Test-side oracles. Deliberately written without the library's geometry so
// that a bug there cannot hide in both places.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roomgp/geometry.hpp"
#include "roomgp/world_sim.hpp"

namespace oracle {

struct P {
  double x, y;
};

/// Point-to-segment distance via the clamped projection parameter.
inline double point_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

/// Ray (o, unit d) to segment [a, b] hit distance, solving the 2x2 system
/// with Cramer's rule.
inline std::optional<double> ray_segment(P o, P d, P a, P b) {
  // o + t d = a + u (b - a)
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double det = d.x * (-ey) - d.y * (-ex);
  if (std::abs(det) < 1e-15) return std::nullopt;
  const double rx = a.x - o.x, ry = a.y - o.y;
  const double t = (rx * (-ey) - ry * (-ex)) / det;
  const double u = (d.x * ry - d.y * rx) / det;
  if (t < 0 || u < 0 || u > 1) return std::nullopt;
  return t;
}

/// Exhaustive minimum distance to segments and points.
inline double brute_distance(P x, const std::vector<roomgp::LineSegment>& segs, const std::vector<P>& pts = {}) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : segs) best = std::min(best, point_segment(x.x, x.y, s.p1.x, s.p1.y, s.p2.x, s.p2.y));
  for (const auto& p : pts) best = std::min(best, std::hypot(x.x - p.x, x.y - p.y));
  return best;
}

/// Sparse GP batch posterior over u = f(Z) (Titsias / DTC form), computed
/// from scratch in one shot:
///   Sigma = (K_zz + K_zf K_fz / sn2)^{-1}
///   m     = K_zz Sigma K_zf y / sn2
///   S     = K_zz Sigma K_zz
/// Residual mean at x: k_x^T K_zz^{-1} m.
struct BatchSparseGp {
  Eigen::MatrixXd kzz;
  Eigen::VectorXd m;
  std::vector<P> z;
  double rate = 100, s2 = 1;

  double k(P a, P b) const {
    const double r = std::hypot(a.x - b.x, a.y - b.y);
    return s2 * (1.0 + rate * r) * std::exp(-rate * r);
  }

  BatchSparseGp(const std::vector<P>& z_, const std::vector<P>& x, const std::vector<double>& y, double rate_,
                double s2_, double sn2, double jitter)
      : z(z_), rate(rate_), s2(s2_) {
    const auto mz = static_cast<Eigen::Index>(z.size()), n = static_cast<Eigen::Index>(x.size());
    kzz.resize(mz, mz);
    for (Eigen::Index i = 0; i < mz; ++i)
      for (Eigen::Index j = 0; j < mz; ++j) kzz(i, j) = k(z[i], z[j]);
    kzz.diagonal().array() += jitter * s2;
    Eigen::MatrixXd kzf(mz, n);
    for (Eigen::Index i = 0; i < mz; ++i)
      for (Eigen::Index j = 0; j < n; ++j) kzf(i, j) = k(z[i], x[j]);
    Eigen::VectorXd yv(n);
    for (Eigen::Index j = 0; j < n; ++j) yv(j) = y[j];
    const Eigen::MatrixXd a = kzz + kzf * kzf.transpose() / sn2;
    const Eigen::VectorXd sol = a.ldlt().solve(kzf * yv / sn2);
    m = kzz * sol;
  }

  double mean(P x) const {
    Eigen::VectorXd kx(static_cast<Eigen::Index>(z.size()));
    for (Eigen::Index i = 0; i < kx.size(); ++i) kx(i) = k(x, z[i]);
    return kx.dot(kzz.ldlt().solve(m));
  }
};

/// Normalized cut sum_c cut(c, rest) / vol(c); +inf when a group has no volume.
inline double ncut(const Eigen::MatrixXd& a, const std::vector<int>& labels, int k) {
  double total = 0;
  for (int c = 0; c < k; ++c) {
    double cut = 0, vol = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (labels[static_cast<std::size_t>(i)] != c) continue;
      for (Eigen::Index j = 0; j < a.rows(); ++j) {
        vol += a(i, j);
        if (labels[static_cast<std::size_t>(j)] != c) cut += a(i, j);
      }
    }
    if (vol == 0) return std::numeric_limits<double>::infinity();
    total += cut / vol;
  }
  return total;
}

namespace detail {
inline void enumerate(const Eigen::MatrixXd& a, int k, std::vector<int>& cur, std::size_t i, int top, double& best,
                      std::vector<int>& arg) {
  if (i == cur.size()) {
    if (top + 1 != k) return;
    const double v = ncut(a, cur, k);
    if (v < best - 1e-12) {
      best = v;
      arg = cur;
    }
    return;
  }
  for (int c = 0; c <= std::min(top + 1, k - 1); ++c) {
    cur[i] = c;
    enumerate(a, k, cur, i + 1, std::max(top, c), best, arg);
  }
}
}  // namespace detail

/// Exhaustive minimum normalized cut over all partitions into exactly k
/// non-empty groups. Labels come back in first-appearance order.
inline std::vector<int> min_ncut(const Eigen::MatrixXd& a, int k, double* value = nullptr) {
  std::vector<int> cur(static_cast<std::size_t>(a.rows())), arg;
  double best = std::numeric_limits<double>::infinity();
  detail::enumerate(a, k, cur, 0, -1, best, arg);
  if (value) *value = best;
  return arg;
}

inline bool connected(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < n; ++j)
      if (a(v, j) > 0 && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        stack.push_back(j);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

/// Connected Erdos-Renyi graph (p = 0.6) with weights in [0.05, 1].
inline Eigen::MatrixXd random_connected_graph(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd a(n, n);
  do {
    a.setZero();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (u(rng) < 0.6) a(i, j) = a(j, i) = 0.05 + 0.95 * u(rng);
  } while (!connected(a));
  return a;
}

/// Connected graph with k planted dense groups and sparse weak cross edges.
inline Eigen::MatrixXd planted_graph(std::mt19937_64& rng, int n, int k) {
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd a(n, n);
  do {
    a.setZero();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const bool same = i * k / n == j * k / n;
        const double w = same ? 0.5 + 0.5 * u(rng) : (u(rng) < 0.3 ? 0.1 * u(rng) : 0.0);
        a(i, j) = a(j, i) = w;
      }
  } while (!connected(a));
  return a;
}

/// Walls of an axis-aligned rectangle, normals pointing inwards.
inline std::vector<roomgp::LineSegment> rect_walls(double x0, double y0, double x1, double y1) {
  using roomgp::make_segment;
  // Counter-clockwise corners: left normal of each edge points inside.
  return {make_segment({x0, y0}, {x1, y0}), make_segment({x1, y0}, {x1, y1}), make_segment({x1, y1}, {x0, y1}),
          make_segment({x0, y1}, {x0, y0})};
}

inline roomgp::FloorPlan rect_plan(double x0, double y0, double x1, double y1, int room = 0) {
  roomgp::FloorPlan plan;
  plan.name = "rect";
  plan.walls = {{{x0, y0}, {x1, y0}, room}, {{x1, y0}, {x1, y1}, room}, {{x1, y1}, {x0, y1}, room},
                {{x0, y1}, {x0, y0}, room}};
  return plan;
}

/// Unique scratch file under the system temp directory.
inline std::string temp_path(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  return (std::filesystem::temp_directory_path() / ("roomgp_test_" + std::to_string(rng()) + "_" + name)).string();
}

inline std::string write_temp(const std::string& name, const std::string& text) {
  const std::string p = temp_path(name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace oracle
