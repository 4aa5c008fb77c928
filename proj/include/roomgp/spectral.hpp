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
 * spectral.hpp
 *
 * Spectral graph clustering on a dense affinity matrix:
 *   L_sym = I - D^{-1/2} A D^{-1/2}
 * cluster count from the largest eigengap, labels from a column-pivoted QR
 * of the leading eigenvectors (no k-means, no randomness).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roomgp/geometry.hpp"

namespace roomgp::spectral {

/// Eigenvalues below this are treated as zero.
inline constexpr double kZeroEigenvalue = 1e-8;

inline Eigen::VectorXd degrees(const Eigen::MatrixXd& affinity) { return affinity.rowwise().sum(); }

/// Normalized symmetric Laplacian. Zero-degree nodes get an identity row.
inline Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
  const Eigen::Index n = affinity.rows();
  if (affinity.cols() != n) throw Error("affinity matrix must be square");
  const Eigen::VectorXd d = degrees(affinity);
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  Eigen::MatrixXd l = -(inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  return 0.5 * (l + l.transpose());
}

struct Spectrum {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

inline Spectrum laplacian_spectrum(const Eigen::MatrixXd& affinity, bool with_vectors = true) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      normalized_laplacian(affinity), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
  Spectrum s;
  s.values = es.eigenvalues();
  if (with_vectors) s.vectors = es.eigenvectors();
  return s;
}

/// k = argmax over 1 <= i <= min(n - 1, k_max) of (lambda_{i+1} - lambda_i),
/// 1-based, smallest i on ties.
inline int estimate_k_eigengap(std::span<const double> eigenvalues, int k_max) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 2) return 1;
  const int last = std::min(n - 1, std::max(k_max, 1));
  int best = 1;
  double best_gap = -1.0;
  for (int i = 1; i <= last; ++i) {
    const double gap = eigenvalues[static_cast<std::size_t>(i)] - eigenvalues[static_cast<std::size_t>(i - 1)];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

inline int estimate_k_eigengap(const Eigen::VectorXd& eigenvalues, int k_max) {
  return estimate_k_eigengap(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())),
                             k_max);
}

struct Assignment {
  std::vector<int> labels;
  std::vector<Eigen::Index> pivots;
  bool singular_fallback = false;
};

/// Relabels clusters in order of first appearance so equal partitions compare equal.
inline std::vector<int> canonical_labels(std::span<const int> labels) {
  std::vector<int> map;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l < 0) {
      out.push_back(l);
      continue;
    }
    if (static_cast<std::size_t>(l) >= map.size()) map.resize(static_cast<std::size_t>(l) + 1, -1);
    if (map[static_cast<std::size_t>(l)] < 0)
      map[static_cast<std::size_t>(l)] = static_cast<int>(std::count_if(map.begin(), map.end(), [](int v) { return v >= 0; }));
    out.push_back(map[static_cast<std::size_t>(l)]);
  }
  return out;
}

/// Column-pivoted QR assignment on the leading k eigenvectors U (n x k).
/// Returns canonical labels (first appearance order).
inline Assignment cpqr_assign(const Eigen::MatrixXd& u) {
  const Eigen::Index n = u.rows();
  const Eigen::Index k = u.cols();
  Assignment out;
  if (k <= 1 || n == 0) {
    out.labels.assign(static_cast<std::size_t>(n), 0);
    return out;
  }
  if (k > n) throw Error("cpqr_assign: more clusters than nodes");
  const Eigen::MatrixXd ut = u.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ut);
  const auto& perm = qr.colsPermutation().indices();
  Eigen::MatrixXd uj(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.pivots.push_back(perm(j));
    uj.row(j) = u.row(perm(j));
  }

  std::vector<int> raw(static_cast<std::size_t>(n), 0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(uj);
  lu.setThreshold(1e-10);
  if (lu.isInvertible()) {
    // C = U * U_J^{-1}; row i is node i's coordinates in the pivot basis.
    const Eigen::MatrixXd c = u * lu.inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < k; ++j)
        if (std::abs(c(i, j)) > std::abs(c(i, best))) best = j;
      raw[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
  } else {
    out.singular_fallback = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = (u.row(i) - uj.row(0)).squaredNorm();
      for (Eigen::Index j = 1; j < k; ++j) {
        const double d = (u.row(i) - uj.row(j)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      raw[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
  }
  out.labels = canonical_labels(raw);
  return out;
}

/// Second-smallest eigenvalue of L_sym. A graph with an isolated node is
/// disconnected and reports 0.
inline double fiedler_value(const Eigen::MatrixXd& affinity) {
  if (affinity.rows() < 2) throw Error("fiedler_value needs at least 2 nodes");
  if ((degrees(affinity).array() <= 0.0).any()) return 0.0;
  const Spectrum s = laplacian_spectrum(affinity, false);
  return std::max(0.0, s.values(1));
}

/// Number of connected components among nodes with positive degree.
inline int zero_eigenvalue_count(const Eigen::VectorXd& values) {
  return static_cast<int>((values.array().abs() < kZeroEigenvalue).count());
}

struct ClusterResult {
  std::vector<int> labels;  // -1 for isolated (zero-degree) nodes
  int k = 1;           // eigengap estimate, or the requested count
  int n_clusters = 1;  // labels actually used
  Eigen::VectorXd eigenvalues;
  bool singular_fallback = false;
};

/// Spectral clustering on the positive-degree nodes. With `fixed_k` > 0 the
/// eigengap estimate is skipped and that many clusters are produced.
inline ClusterResult spectral_cluster(const Eigen::MatrixXd& affinity, int k_max, int fixed_k = 0) {
  const Eigen::Index n = affinity.rows();
  ClusterResult res;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  const Eigen::VectorXd d = degrees(affinity);
  std::vector<Eigen::Index> usable;
  for (Eigen::Index i = 0; i < n; ++i)
    if (d(i) > 0.0) usable.push_back(i);
  const auto m = static_cast<Eigen::Index>(usable.size());
  if (m < 2) {
    for (auto i : usable) res.labels[static_cast<std::size_t>(i)] = 0;
    res.k = 1;
    res.n_clusters = usable.empty() ? 0 : 1;
    return res;
  }
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = a == b ? 0.0 : affinity(usable[a], usable[b]);
  const Spectrum s = laplacian_spectrum(sub);
  res.eigenvalues = s.values;
  int k = fixed_k > 0 ? fixed_k : estimate_k_eigengap(s.values, k_max);
  k = std::clamp(k, 1, static_cast<int>(m));
  res.k = k;
  const Assignment a = cpqr_assign(s.vectors.leftCols(k));
  res.singular_fallback = a.singular_fallback;
  for (Eigen::Index i = 0; i < m; ++i) res.labels[static_cast<std::size_t>(usable[i])] = a.labels[static_cast<std::size_t>(i)];
  // A pivot cluster can come out empty in degenerate cases.
  res.n_clusters = 1 + *std::max_element(a.labels.begin(), a.labels.end());
  return res;
}

}  // namespace roomgp::spectral
