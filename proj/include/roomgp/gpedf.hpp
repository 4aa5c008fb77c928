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
 * gpedf.hpp
 *
 * Streaming sparse GP Euclidean distance field with a line-segment prior.
 *
 * The latent field f has prior mean m_L(x) = exp(-lambda * min_i d(x, l_i))
 * and a Matern-3/2 covariance k(r) = s2 (1 + lambda r) exp(-lambda r), where
 * lambda is a decay rate in 1/m. Surface observations have target 1; the GP
 * regresses the residual y - m_L(x). Distance is recovered as
 *
 *   d(x) = -ln(f_mean(x)) / lambda,
 *
 * evaluated in the log domain so that the prior term never underflows.
 *
 * The variational posterior q(u) = N(m, S) over the inducing values u = f(Z)
 * is updated in closed form for each batch (Gaussian likelihood, fixed
 * hyperparameters):
 *
 *   S_new^{-1} = S^{-1} + A^T A / sn2,   A = K_fz K_zz^{-1}
 *   m_new      = S_new (S^{-1} m + A^T r / sn2)
 *
 * Growing Z extends q with the prior conditional p(u_new | u_old), so old data
 * stays summarized by the previous posterior.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include "roomgp/geometry.hpp"
#include "roomgp/rooms.hpp"

namespace roomgp {

namespace detail {

// Far-field kernel entries (lambda r > ~700) and their products are
// subnormal; on x86 those run an order of magnitude slower through the
// dense kernels while contributing nothing at double precision. Flush them
// to zero for the duration of a call and restore the caller's mode.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }  // FTZ | DAZ
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#else
  FlushSubnormals() = default;
#endif
 public:
  FlushSubnormals(const FlushSubnormals&) = delete;
  FlushSubnormals& operator=(const FlushSubnormals&) = delete;
};

}  // namespace detail

struct GpHyper {
  double rate = 100.0;               // lambda, 1/m
  double signal_var = 1.0;           // sigma^2
  double noise_var = 1e-4;           // sigma_n^2
  double inducing_threshold = 1e-6;  // T_Z
  double f_min = 1e-300;
  double fd_step = 1e-3;
  double jitter = 1e-8;              // relative to signal_var
  double prune_radius = 0.05;

  void validate() const {
    if (!(rate > 0.0 && signal_var > 0.0 && noise_var > 0.0 && inducing_threshold > 0.0))
      throw Error("GpHyper: lambda, sigma^2, sigma_n^2 and T_Z must be > 0");
    if (!(inducing_threshold < signal_var)) throw Error("GpHyper: T_Z must be below sigma^2");
    if (!(f_min > 0.0 && f_min < 1.0)) throw Error("GpHyper: f_min must be in (0, 1)");
    if (!(fd_step > 0.0)) throw Error("GpHyper: fd_step must be > 0");
  }

  double distance_cap() const { return -std::log(f_min) / rate; }

  bool operator==(const GpHyper&) const = default;
};

inline double matern32(double r, const GpHyper& h) {
  const double s = h.rate * r;
  return h.signal_var * (1.0 + s) * std::exp(-s);
}

inline double matern32(const Point2& a, const Point2& b, const GpHyper& h) { return matern32(distance(a, b), h); }

inline double log_matern32(double r, const GpHyper& h) {
  const double s = h.rate * r;
  return std::log(h.signal_var) + std::log1p(s) - s;
}

inline double min_line_distance(const Point2& x, std::span<const LineSegment> lines) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : lines) best = std::min(best, segment_point_distance(x, l));
  return best;
}

/// ln m_L(x) = -lambda * min_i d(x, l_i); -inf for an empty line set.
inline double line_prior_log(const Point2& x, std::span<const LineSegment> lines, double rate) {
  if (lines.empty()) return -std::numeric_limits<double>::infinity();
  return -rate * min_line_distance(x, lines);
}

inline double line_prior_mean(const Point2& x, std::span<const LineSegment> lines, double rate) {
  return std::exp(line_prior_log(x, lines, rate));
}

enum class DistanceMode {
  log_transform,   // d = -ln(f) / lambda
  matern_inverse,  // solve (1 + lambda d) exp(-lambda d) = f
};

struct DistanceQuery {
  double distance = 0.0;
  double variance = 0.0;
  double log_f = 0.0;  // ln of the total predictive mean, before clamping
  bool clamped = false;  // hit the f_min floor
};

struct GradientQuery {
  Point2 gradient;
  bool clamped = false;
};

struct SurfacePoint {
  Point2 position;
  double target = 1.0;
};

/// Inverse of r -> (1 + lambda r) exp(-lambda r) from its logarithm.
inline double invert_matern32_log(double log_value, double rate) {
  if (log_value >= 0.0) return 0.0;
  // Newton on g(s) = ln(1 + s) - s - log_value, s = lambda r.
  double s = -log_value;
  for (int it = 0; it < 60; ++it) {
    const double g = std::log1p(s) - s - log_value;
    const double dg = 1.0 / (1.0 + s) - 1.0;
    const double step = g / dg;
    s = std::max(s - step, 0.0);
    if (std::abs(step) < 1e-14 * std::max(1.0, s)) break;
  }
  return s / rate;
}

class GpEdfModel {
 public:
  GpEdfModel() { refresh(); }
  explicit GpEdfModel(GpHyper hyper, RoomId room = 0) : room_id_(room), hyper_(hyper) {
    hyper_.validate();
    refresh();
  }

  RoomId room_id() const { return room_id_; }
  void set_room_id(RoomId id) { room_id_ = id; }
  const GpHyper& hyper() const { return hyper_; }
  const std::vector<LineSegment>& lines() const { return lines_; }
  const std::vector<Point2>& inducing() const { return inducing_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  bool has_cov() const { return has_cov_; }
  std::size_t n_absorbed() const { return n_absorbed_; }
  std::size_t size() const { return inducing_.size(); }
  bool empty() const { return lines_.empty() && inducing_.empty(); }

  /// Replaces the prior line set. Inducing points within prune_radius of a
  /// line are marginalized out.
  void set_lines(std::vector<LineSegment> lines) {
    lines_ = std::move(lines);
    if (lines_.empty() || inducing_.empty()) return;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < inducing_.size(); ++i)
      if (min_line_distance(inducing_[i], lines_) > hyper_.prune_radius) keep.push_back(i);
    if (keep.size() != inducing_.size()) restrict_to(keep);
  }

  /// Adaptive inducing-point selection. Appends every point whose largest
  /// covariance with the current Z is below T_Z, extending q with the prior
  /// conditional. Returns the number of points added.
  std::size_t select_inducing(std::span<const Point2> points) {
    const detail::FlushSubnormals ftz;
    std::vector<Point2> added;
    for (const auto& x : points) {
      double kmax = 0.0;
      for (const auto& z : inducing_) kmax = std::max(kmax, matern32(x, z, hyper_));
      for (const auto& z : added) kmax = std::max(kmax, matern32(x, z, hyper_));
      if (kmax < hyper_.inducing_threshold) added.push_back(x);
    }
    if (!added.empty()) extend(added);
    return added.size();
  }

  /// Absorbs a batch of surface observations into q(u).
  void update(std::span<const SurfacePoint> batch) {
    if (batch.empty()) return;
    for (const auto& p : batch)
      if (!std::isfinite(p.target) || !is_finite(p.position)) throw Error("update: non-finite observation");
    if (inducing_.empty()) {
      n_absorbed_ += batch.size();
      return;
    }
    const detail::FlushSubnormals ftz;
    const auto m = static_cast<Eigen::Index>(inducing_.size());
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd kzf(m, n);
    Eigen::VectorXd resid(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& p = batch[static_cast<std::size_t>(j)];
      for (Eigen::Index i = 0; i < m; ++i) kzf(i, j) = matern32(inducing_[static_cast<std::size_t>(i)], p.position, hyper_);
      resid(j) = p.target - line_prior_mean(p.position, lines_, hyper_.rate);
    }
    // A^T A = K^{-1} (K_zf K_fz) K^{-1}: one rank-n product, then O(m^3) solves.
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, m);
    phi.selfadjointView<Eigen::Lower>().rankUpdate(kzf);
    phi = phi.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXd kinv_phi = kzz_llt_.solve(phi);
    const Eigen::MatrixXd ata = kzz_llt_.solve(kinv_phi.transpose());
    const Eigen::VectorXd atr = kzz_llt_.solve(kzf * resid);

    Eigen::LLT<Eigen::MatrixXd> s_llt(cov_);
    if (s_llt.info() != Eigen::Success) throw Error("update: posterior covariance lost positive definiteness");
    const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd prec = s_llt.solve(ident);
    Eigen::VectorXd h = s_llt.solve(mean_);
    prec.noalias() += ata / hyper_.noise_var;
    h.noalias() += atr / hyper_.noise_var;
    prec = 0.5 * (prec + prec.transpose());

    Eigen::LLT<Eigen::MatrixXd> p_llt(prec);
    if (p_llt.info() != Eigen::Success) throw Error("update: posterior precision not positive definite");
    cov_ = p_llt.solve(ident);
    cov_ = 0.5 * (cov_ + cov_.transpose());
    mean_ = p_llt.solve(h);
    n_absorbed_ += batch.size();
    refresh();
  }

  /// Convenience: surface points with target 1.
  void update(std::span<const Point2> points) {
    std::vector<SurfacePoint> batch;
    batch.reserve(points.size());
    for (const auto& p : points) batch.push_back({p, 1.0});
    update(std::span<const SurfacePoint>(batch));
  }

  /// Posterior mean of the residual field at x.
  double residual_mean(const Point2& x) const {
    const detail::FlushSubnormals ftz;
    double s = 0.0;
    for (std::size_t j = 0; j < inducing_.size(); ++j)
      s += alpha_(static_cast<Eigen::Index>(j)) * matern32(x, inducing_[j], hyper_);
    return s;
  }

  double residual_variance(const Point2& x) const {
    const double kxx = hyper_.signal_var;
    if (inducing_.empty()) return kxx;
    const detail::FlushSubnormals ftz;
    const auto m = static_cast<Eigen::Index>(inducing_.size());
    Eigen::VectorXd kx(m);
    for (Eigen::Index j = 0; j < m; ++j) kx(j) = matern32(x, inducing_[static_cast<std::size_t>(j)], hyper_);
    return std::max(0.0, kxx - kx.dot(var_term_ * kx));
  }

  /// ln of the total predictive mean m_L(x) + residual mean, computed by a
  /// signed log-sum-exp. nullopt when the total is not positive.
  std::optional<double> log_mean(const Point2& x) const {
    const double lp = line_prior_log(x, lines_, hyper_.rate);
    double top = lp;
    for (std::size_t j = 0; j < inducing_.size(); ++j) {
      const double a = alpha_(static_cast<Eigen::Index>(j));
      if (a == 0.0) continue;
      top = std::max(top, std::log(std::abs(a)) + log_matern32(distance(x, inducing_[j]), hyper_));
    }
    if (!std::isfinite(top)) return std::nullopt;
    double sum = std::isfinite(lp) ? std::exp(lp - top) : 0.0;
    for (std::size_t j = 0; j < inducing_.size(); ++j) {
      const double a = alpha_(static_cast<Eigen::Index>(j));
      if (a == 0.0) continue;
      const double t = std::exp(std::log(std::abs(a)) + log_matern32(distance(x, inducing_[j]), hyper_) - top);
      sum += a > 0.0 ? t : -t;
    }
    if (!(sum > 0.0)) return std::nullopt;
    return top + std::log(sum);
  }

  DistanceQuery query_distance(const Point2& x, DistanceMode mode = DistanceMode::log_transform) const {
    DistanceQuery q;
    q.variance = has_cov_ ? residual_variance(x) : std::numeric_limits<double>::quiet_NaN();
    const double log_floor = std::log(hyper_.f_min);
    const auto lm = log_mean(x);
    double lf = lm ? *lm : -std::numeric_limits<double>::infinity();
    q.log_f = lf;
    if (lf <= log_floor) {
      q.clamped = true;
      lf = log_floor;
    }
    lf = std::min(lf, 0.0);
    q.distance = mode == DistanceMode::log_transform ? -lf / hyper_.rate : invert_matern32_log(lf, hyper_.rate);
    return q;
  }

  /// Central finite differences of the distance; zero and flagged when any
  /// stencil point sits at the distance cap.
  GradientQuery query_gradient(const Point2& x) const {
    const double h = hyper_.fd_step;
    const DistanceQuery c = query_distance(x);
    const DistanceQuery xp = query_distance({x.x + h, x.y}), xm = query_distance({x.x - h, x.y});
    const DistanceQuery yp = query_distance({x.x, x.y + h}), ym = query_distance({x.x, x.y - h});
    if (c.clamped || xp.clamped || xm.clamped || yp.clamped || ym.clamped) return {{0.0, 0.0}, true};
    return {{(xp.distance - xm.distance) / (2.0 * h), (yp.distance - ym.distance) / (2.0 * h)}, false};
  }

  /// Keeps only the listed inducing points (marginalization of q).
  void restrict_to(std::span<const std::size_t> keep) {
    std::vector<Point2> z;
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::VectorXd m(k);
    Eigen::MatrixXd s(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]);
      z.push_back(inducing_[keep[static_cast<std::size_t>(a)]]);
      m(a) = mean_(ia);
      for (Eigen::Index b = 0; b < k; ++b) s(a, b) = cov_(ia, static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));
    }
    inducing_ = std::move(z);
    mean_ = std::move(m);
    cov_ = std::move(s);
    refresh();
  }

  /// Direct state assignment (used by split/merge and snapshot import).
  void set_state(std::vector<Point2> z, Eigen::VectorXd m, Eigen::MatrixXd s, bool has_cov = true) {
    if (static_cast<Eigen::Index>(z.size()) != m.size() || s.rows() != m.size() || s.cols() != m.size())
      throw Error("set_state: inconsistent inducing state dimensions");
    inducing_ = std::move(z);
    mean_ = std::move(m);
    cov_ = std::move(s);
    has_cov_ = has_cov;
    refresh();
  }

  void set_lines_unpruned(std::vector<LineSegment> lines) { lines_ = std::move(lines); }
  void add_absorbed(std::size_t n) { n_absorbed_ += n; }

  Eigen::MatrixXd kernel_matrix(std::span<const Point2> a, std::span<const Point2> b) const {
    Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matern32(a[i], b[j], hyper_);
    return k;
  }

  /// K_zz with jitter on the diagonal.
  Eigen::MatrixXd kzz() const {
    Eigen::MatrixXd k = kernel_matrix(inducing_, inducing_);
    k.diagonal().array() += hyper_.jitter * hyper_.signal_var;
    return k;
  }

 private:
  void extend(const std::vector<Point2>& added) {
    const auto a = static_cast<Eigen::Index>(inducing_.size());
    const auto c = static_cast<Eigen::Index>(added.size());
    Eigen::MatrixXd kcc = kernel_matrix(added, added);
    kcc.diagonal().array() += hyper_.jitter * hyper_.signal_var;
    Eigen::VectorXd m(a + c);
    Eigen::MatrixXd s(a + c, a + c);
    if (a == 0) {
      m.setZero();
      s = kcc;
    } else {
      const Eigen::MatrixXd kac = kernel_matrix(inducing_, added);
      const Eigen::MatrixXd wt = kzz_llt_.solve(kac);  // W^T = K_aa^{-1} K_ac
      const Eigen::MatrixXd w = wt.transpose();
      m.head(a) = mean_;
      m.tail(c) = w * mean_;
      s.topLeftCorner(a, a) = cov_;
      const Eigen::MatrixXd s_ca = w * cov_;
      s.bottomLeftCorner(c, a) = s_ca;
      s.topRightCorner(a, c) = s_ca.transpose();
      Eigen::MatrixXd s_cc = kcc - w * kac + s_ca * wt;
      s.bottomRightCorner(c, c) = 0.5 * (s_cc + s_cc.transpose());
    }
    inducing_.insert(inducing_.end(), added.begin(), added.end());
    mean_ = std::move(m);
    cov_ = std::move(s);
    refresh();
  }

  void refresh() {
    const auto m = static_cast<Eigen::Index>(inducing_.size());
    if (m == 0) {
      alpha_.resize(0);
      var_term_.resize(0, 0);
      kzz_llt_ = Eigen::LLT<Eigen::MatrixXd>();
      return;
    }
    kzz_llt_.compute(kzz());
    if (kzz_llt_.info() != Eigen::Success) throw Error("K_zz is not positive definite");
    alpha_ = kzz_llt_.solve(mean_);
    if (has_cov_) {
      const Eigen::MatrixXd kinv = kzz_llt_.solve(Eigen::MatrixXd::Identity(m, m));
      var_term_ = kinv - kinv * cov_ * kinv;
    } else {
      var_term_.setZero(m, m);
    }
  }

  RoomId room_id_ = 0;
  GpHyper hyper_;
  std::vector<LineSegment> lines_;
  std::vector<Point2> inducing_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  bool has_cov_ = true;
  std::size_t n_absorbed_ = 0;

  Eigen::LLT<Eigen::MatrixXd> kzz_llt_;
  Eigen::VectorXd alpha_;     // K_zz^{-1} m
  Eigen::MatrixXd var_term_;  // K^{-1} - K^{-1} S K^{-1}
};

// ---------------------------------------------------------------------------
// Split and merge

namespace detail {

/// Index of the group an inducing point belongs to: unique box containment,
/// else the unique group whose nearest segment has the point on its positive
/// side, else the group with the closest segment.
inline std::size_t match_group(const Point2& z, std::span<const std::vector<LineSegment>> groups,
                               std::span<const Aabb> boxes) {
  std::vector<std::size_t> inside;
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (boxes[g].contains(z)) inside.push_back(g);
  if (inside.size() == 1) return inside.front();
  std::vector<std::size_t> cands = inside;
  if (cands.empty())
    for (std::size_t g = 0; g < groups.size(); ++g) cands.push_back(g);
  std::size_t closest = cands.front();
  double closest_d = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> positive;
  for (std::size_t g : cands) {
    const LineSegment* nearest = nullptr;
    double nd = std::numeric_limits<double>::infinity();
    for (const auto& s : groups[g]) {
      const double d = segment_point_distance(z, s);
      if (d < nd) {
        nd = d;
        nearest = &s;
      }
    }
    if (nd < closest_d) {
      closest_d = nd;
      closest = g;
    }
    if (nearest && half_plane_side(z, *nearest) == Side::positive) positive.push_back(g);
  }
  if (positive.size() == 1) return positive.front();
  return closest;
}

}  // namespace detail

/// Distributes a model's inducing points and their variational blocks over
/// line groups. Every inducing point goes to exactly one child.
inline std::vector<GpEdfModel> partition_model(const GpEdfModel& parent,
                                               const std::vector<std::vector<LineSegment>>& groups,
                                               std::span<const RoomId> child_ids = {}) {
  if (groups.empty()) throw Error("partition_model: no line groups");
  std::vector<Aabb> boxes;
  for (const auto& g : groups) {
    if (g.empty()) throw Error("partition_model: empty line group");
    boxes.push_back(bounding_box(g));
  }
  std::vector<std::vector<std::size_t>> members(groups.size());
  for (std::size_t i = 0; i < parent.inducing().size(); ++i)
    members[detail::match_group(parent.inducing()[i], groups, boxes)].push_back(i);

  std::vector<GpEdfModel> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GpEdfModel child(parent.hyper(), g < child_ids.size() ? child_ids[g] : parent.room_id());
    const auto& idx = members[g];
    const auto k = static_cast<Eigen::Index>(idx.size());
    std::vector<Point2> z;
    Eigen::VectorXd m(k);
    Eigen::MatrixXd s(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ia = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
      z.push_back(parent.inducing()[idx[static_cast<std::size_t>(a)]]);
      m(a) = parent.mean()(ia);
      for (Eigen::Index b = 0; b < k; ++b)
        s(a, b) = parent.cov()(ia, static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
    }
    child.set_state(std::move(z), std::move(m), std::move(s), parent.has_cov());
    child.set_lines_unpruned(groups[g]);
    out.push_back(std::move(child));
  }
  return out;
}

inline std::pair<GpEdfModel, GpEdfModel> split_model(const GpEdfModel& parent, std::vector<LineSegment> l1,
                                                     std::vector<LineSegment> l2) {
  if (l1.empty() || l2.empty()) throw Error("split_model: both line subsets must be non-empty");
  auto parts = partition_model(parent, {std::move(l1), std::move(l2)});
  return {std::move(parts[0]), std::move(parts[1])};
}

/// Union of two models. Points of the smaller inducing set already covered
/// by the other (kernel >= T_Z) are dropped; cross-covariances are zero.
inline GpEdfModel merge_models(const GpEdfModel& m1, const GpEdfModel& m2) {
  if (!(m1.hyper() == m2.hyper())) throw Error("merge_models: hyperparameter mismatch");
  if (m2.empty()) return m1;
  if (m1.empty()) {
    GpEdfModel out = m2;
    out.set_room_id(m1.room_id());
    return out;
  }
  const bool first_larger = m1.size() >= m2.size();
  const GpEdfModel& big = first_larger ? m1 : m2;
  const GpEdfModel& small = first_larger ? m2 : m1;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < small.size(); ++i) {
    double kmax = 0.0;
    for (const auto& z : big.inducing()) kmax = std::max(kmax, matern32(small.inducing()[i], z, big.hyper()));
    if (kmax < big.hyper().inducing_threshold) keep.push_back(i);
  }
  const auto nb = static_cast<Eigen::Index>(big.size());
  const auto ns = static_cast<Eigen::Index>(keep.size());
  std::vector<Point2> z = big.inducing();
  Eigen::VectorXd m(nb + ns);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nb + ns, nb + ns);
  m.head(nb) = big.mean();
  s.topLeftCorner(nb, nb) = big.cov();
  for (Eigen::Index a = 0; a < ns; ++a) {
    const auto ia = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]);
    z.push_back(small.inducing()[keep[static_cast<std::size_t>(a)]]);
    m(nb + a) = small.mean()(ia);
    for (Eigen::Index b = 0; b < ns; ++b)
      s(nb + a, nb + b) = small.cov()(ia, static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));
  }
  GpEdfModel out(m1.hyper(), m1.room_id());
  std::vector<LineSegment> lines = m1.lines();
  lines.insert(lines.end(), m2.lines().begin(), m2.lines().end());
  out.set_state(std::move(z), std::move(m), std::move(s), m1.has_cov() && m2.has_cov());
  out.set_lines_unpruned(std::move(lines));
  out.add_absorbed(m1.n_absorbed() + m2.n_absorbed());
  return out;
}

// ---------------------------------------------------------------------------
// Snapshot export

inline nlohmann::json hyper_to_json(const GpHyper& h) {
  return {{"lambda", h.rate},         {"sigma2", h.signal_var},   {"noise_var", h.noise_var},
          {"T_Z", h.inducing_threshold}, {"f_min", h.f_min},       {"fd_step", h.fd_step},
          {"jitter", h.jitter},       {"prune_radius", h.prune_radius}};
}

inline GpHyper hyper_from_json(const nlohmann::json& j, GpHyper base = {}) {
  auto get = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = j.at(key).get<double>();
  };
  get("lambda", base.rate);
  get("sigma2", base.signal_var);
  get("noise_var", base.noise_var);
  get("T_Z", base.inducing_threshold);
  get("f_min", base.f_min);
  get("fd_step", base.fd_step);
  get("jitter", base.jitter);
  get("prune_radius", base.prune_radius);
  base.validate();
  return base;
}

inline nlohmann::json segment_to_json(const LineSegment& s) {
  return {{"id", s.id},
          {"p1", {s.p1.x, s.p1.y}},
          {"p2", {s.p2.x, s.p2.y}},
          {"normal", {s.normal.x, s.normal.y}},
          {"robot", {s.last_robot_pos.x, s.last_robot_pos.y}}};
}

inline LineSegment segment_from_json(const nlohmann::json& j) {
  auto pt = [&](const char* key) { return Point2{j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>()}; };
  LineSegment s;
  s.id = j.value("id", SegmentId{-1});
  s.p1 = pt("p1");
  s.p2 = pt("p2");
  s.normal = j.contains("normal") ? pt("normal") : perp(normalized(s.p2 - s.p1));
  s.last_robot_pos = j.contains("robot") ? pt("robot") : s.midpoint() + s.normal;
  return s;
}

inline nlohmann::json model_to_json(const GpEdfModel& model, bool include_cov = false) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : model.lines()) lines.push_back(segment_to_json(l));
  nlohmann::json z = nlohmann::json::array();
  for (const auto& p : model.inducing()) z.push_back({p.x, p.y});
  nlohmann::json m = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.mean().size(); ++i) m.push_back(model.mean()(i));
  nlohmann::json out{{"room_id", model.room_id()}, {"lines", lines}, {"Z", z}, {"m_a", m},
                     {"hyper", hyper_to_json(model.hyper())}, {"n_absorbed", model.n_absorbed()}};
  if (include_cov && model.has_cov()) {
    nlohmann::json s = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.cov().rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < model.cov().cols(); ++j) row.push_back(model.cov()(i, j));
      s.push_back(row);
    }
    out["S_a"] = s;
  }
  return out;
}

inline GpEdfModel model_from_json(const nlohmann::json& j) {
  GpEdfModel model(hyper_from_json(j.value("hyper", nlohmann::json::object())), j.value("room_id", 0));
  std::vector<LineSegment> lines;
  for (const auto& l : j.value("lines", nlohmann::json::array())) lines.push_back(segment_from_json(l));
  std::vector<Point2> z;
  for (const auto& p : j.value("Z", nlohmann::json::array())) z.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  const auto& ma = j.value("m_a", nlohmann::json::array());
  if (ma.size() != z.size()) throw Error("model snapshot: |m_a| != |Z|");
  Eigen::VectorXd m(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) m(static_cast<Eigen::Index>(i)) = ma[i].get<double>();
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  const bool has_cov = j.contains("S_a");
  if (has_cov) {
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) s(a, b) = j.at("S_a").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>();
  } else {
    s = model.kernel_matrix(z, z);
  }
  model.set_state(std::move(z), std::move(m), std::move(s), has_cov);
  model.set_lines_unpruned(std::move(lines));
  return model;
}

}  // namespace roomgp
