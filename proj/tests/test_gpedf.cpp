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

#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "roomgp/gpedf.hpp"
#include "test_util.hpp"

namespace roomgp {
namespace {

std::vector<Point2> circle(Point2 c, double r, int n, double phase = 0.0) {
  std::vector<Point2> out;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2 * std::numbers::pi * i / n;
    out.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return out;
}

TEST(Matern32, Values) {
  const GpHyper h;
  EXPECT_DOUBLE_EQ(matern32(0.0, h), 1.0);
  EXPECT_NEAR(matern32(0.01, h), 2 * std::exp(-1.0), 1e-12);
  double prev = 1.0;
  for (double r = 1e-4; r < 0.5; r *= 1.3) {
    const double k = matern32(r, h);
    EXPECT_LT(k, prev);
    prev = k;
  }
  EXPECT_NEAR(log_matern32(0.37, h), std::log(matern32(0.37, h)), 1e-12);
}

TEST(LinePrior, Values) {
  const std::vector<LineSegment> lines{make_segment({0, 0}, {1, 0}), make_segment({5, 5}, {6, 5})};
  EXPECT_DOUBLE_EQ(line_prior_mean({0.5, 0}, lines, 100), 1.0);
  EXPECT_NEAR(line_prior_mean({0.5, 0.02}, lines, 100), std::exp(-2.0), 1e-12);
  EXPECT_EQ(line_prior_mean({0.5, 0.02}, std::vector<LineSegment>{}, 100), 0.0);
  EXPECT_NEAR(line_prior_log({0.5, 3}, lines, 100), -300.0, 1e-9);
}

TEST(SelectInducing, Rules) {
  GpEdfModel m(GpHyper{});
  const std::vector<Point2> first{{0, 0}};
  EXPECT_EQ(m.select_inducing(first), 1u);
  EXPECT_EQ(m.select_inducing(first), 0u);  // duplicate: k = sigma^2
  // 1 m away: 101 e^-100 << 1e-6.
  EXPECT_LT(matern32(1.0, m.hyper()), 1e-6);
  const std::vector<Point2> far{{1, 0}};
  EXPECT_EQ(m.select_inducing(far), 1u);
  // 0.1 m: 11 e^-10 ~ 5e-4 >= T_Z, skipped.
  const std::vector<Point2> near{{0.1, 0}};
  EXPECT_EQ(m.select_inducing(near), 0u);
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.mean().size(), 2);
  // Distinct inducing points are never redundant.
  EXPECT_LT(matern32(m.inducing()[0], m.inducing()[1], m.hyper()), m.hyper().inducing_threshold);
}

TEST(Update, EmptyBatchLeavesModelUnchanged) {
  GpEdfModel m(GpHyper{});
  const auto pts = circle({1, 1}, 0.3, 40);
  m.select_inducing(pts);
  m.update(std::span<const Point2>(pts));
  const Eigen::VectorXd mean = m.mean();
  const Eigen::MatrixXd cov = m.cov();
  m.update(std::span<const Point2>{});
  EXPECT_EQ(m.mean(), mean);
  EXPECT_EQ(m.cov(), cov);
  EXPECT_EQ(m.n_absorbed(), 40u);
}

TEST(Update, RejectsNonFiniteTargets) {
  GpEdfModel m(GpHyper{});
  const std::vector<SurfacePoint> bad{{{0, 0}, std::numeric_limits<double>::quiet_NaN()}};
  EXPECT_THROW(m.update(std::span<const SurfacePoint>(bad)), Error);
}

TEST(Update, StreamingMatchesBatchOracle) {
  GpHyper h;
  GpEdfModel m(h);
  const std::vector<LineSegment> walls = oracle::rect_walls(0, 0, 4, 3);
  m.set_lines(walls);
  // 200 residual points on a circular obstacle, 4 batches of interleaved angles.
  std::vector<Point2> all;
  for (int b = 0; b < 4; ++b) {
    const auto batch = circle({2, 1.5}, 0.3, 50, b * 2 * std::numbers::pi / 200);
    m.select_inducing(batch);
    m.update(std::span<const Point2>(batch));
    all.insert(all.end(), batch.begin(), batch.end());
  }
  std::vector<oracle::P> z, x;
  std::vector<double> y;
  for (const auto& p : m.inducing()) z.push_back({p.x, p.y});
  for (const auto& p : all) {
    x.push_back({p.x, p.y});
    y.push_back(1.0 - std::exp(-h.rate * oracle::brute_distance({p.x, p.y}, walls)));
  }
  const oracle::BatchSparseGp batch(z, x, y, h.rate, h.signal_var, h.noise_var, h.jitter);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), rad(0.25, 0.35);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double a = ang(rng), r = rad(rng);
    const Point2 q{2 + r * std::cos(a), 1.5 + r * std::sin(a)};
    worst = std::max(worst, std::abs(m.residual_mean(q) - batch.mean({q.x, q.y})));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(Update, PointsOnPriorLinesGiveZeroResidual) {
  std::vector<Point2> on;
  for (int i = 0; i < 40; ++i) on.push_back({0.1 * i, 0.0});
  // Bypass pruning: the points sit exactly on the prior.
  GpEdfModel raw(GpHyper{});
  raw.set_lines_unpruned(oracle::rect_walls(0, 0, 4, 3));
  raw.select_inducing(on);
  raw.update(std::span<const Point2>(on));
  for (const auto& p : on) EXPECT_LT(std::abs(raw.residual_mean(p)), 1e-3);
}

TEST(Update, CovarianceStaysPsd) {
  GpEdfModel m(GpHyper{});
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 2);
  for (int b = 0; b < 5; ++b) {
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({u(rng), u(rng)});
    m.select_inducing(pts);
    m.update(std::span<const Point2>(pts));
    EXPECT_TRUE(m.cov().isApprox(m.cov().transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.cov());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(Update, RepresentingBatchAddsNoInducing) {
  GpEdfModel m(GpHyper{});
  const auto pts = circle({0, 0}, 1.0, 300);
  const std::size_t added = m.select_inducing(pts);
  EXPECT_LE(added, pts.size());
  EXPECT_EQ(m.select_inducing(pts), 0u);
}

TEST(QueryDistance, PriorOnly) {
  GpEdfModel m(GpHyper{});
  const auto walls = oracle::rect_walls(0, 0, 6, 4);
  m.set_lines(walls);
  EXPECT_DOUBLE_EQ(m.query_distance({3, 0}).distance, 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 6), uy(0, 4);
  int n = 0;
  while (n < 100) {
    const Point2 p{ux(rng), uy(rng)};
    const double truth = oracle::brute_distance({p.x, p.y}, walls);
    if (truth <= 0 || truth > 2) continue;
    ++n;
    EXPECT_LE(std::abs(m.query_distance(p).distance - truth), 0.1);
    EXPECT_NEAR(m.query_distance(p).distance, truth, 1e-9);  // exact with no residual data
  }
}

TEST(QueryDistance, ClampAndEmptyModel) {
  GpEdfModel m(GpHyper{});
  const auto empty = m.query_distance({0, 0});
  EXPECT_TRUE(empty.clamped);
  EXPECT_NEAR(empty.distance, m.hyper().distance_cap(), 1e-12);
  m.set_lines({make_segment({0, 0}, {1, 0})});
  const auto far = m.query_distance({0, 50});
  EXPECT_TRUE(far.clamped);
  EXPECT_NEAR(far.distance, -std::log(1e-300) / 100, 1e-9);
  EXPECT_FALSE(m.query_distance({0.5, 1}).clamped);
}

TEST(QueryDistance, MaternInverseMode) {
  GpEdfModel m(GpHyper{});
  m.set_lines({make_segment({0, 0}, {1, 0})});
  const double d = m.query_distance({0.5, 0.5}, DistanceMode::matern_inverse).distance;
  // Solves (1 + 100 d) e^{-100 d} = e^{-50}.
  EXPECT_NEAR(std::log1p(100 * d) - 100 * d, -50.0, 1e-9);
}

TEST(QueryGradient, Examples) {
  GpEdfModel one(GpHyper{});
  one.set_lines({make_segment({0, 0}, {1, 0})});
  const auto g = one.query_gradient({0.5, 0.5});
  EXPECT_FALSE(g.clamped);
  EXPECT_NEAR(g.gradient.x, 0.0, 1e-6);
  EXPECT_NEAR(g.gradient.y, 1.0, 1e-6);
  EXPECT_GE(norm(g.gradient), 0.9);
  EXPECT_LE(norm(g.gradient), 1.1);

  GpEdfModel two(GpHyper{});
  two.set_lines({make_segment({0, 0}, {2, 0}), make_segment({2, 2}, {0, 2})});
  EXPECT_LT(norm(two.query_gradient({1, 1}).gradient), 1e-6);

  const auto far = one.query_gradient({0.5, 20});
  EXPECT_TRUE(far.clamped);
  EXPECT_EQ(far.gradient, (Point2{0, 0}));
}

GpEdfModel two_room_model() {
  GpEdfModel m(GpHyper{}, 4);
  std::vector<LineSegment> lines = oracle::rect_walls(0, 0, 3, 3);
  for (const auto& s : oracle::rect_walls(3.5, 0, 6.5, 3)) lines.push_back(s);
  m.set_lines(lines);
  std::vector<Point2> pts = circle({1.5, 1.5}, 0.3, 30);
  for (const auto& p : circle({5, 1.5}, 0.3, 30)) pts.push_back(p);
  m.select_inducing(pts);
  m.update(std::span<const Point2>(pts));
  return m;
}

TEST(SplitModel, InsideOneBoxGoesThere) {
  const GpEdfModel m = two_room_model();
  const auto lines = m.lines();
  const std::vector<LineSegment> l1(lines.begin(), lines.begin() + 4), l2(lines.begin() + 4, lines.end());
  const auto [c1, c2] = split_model(m, l1, l2);
  EXPECT_EQ(c1.size() + c2.size(), m.size());
  for (const auto& z : c1.inducing()) EXPECT_LT(z.x, 3.0);
  for (const auto& z : c2.inducing()) EXPECT_GT(z.x, 3.5);
  EXPECT_EQ(c1.lines().size(), 4u);
  // The variational blocks move with their points.
  for (std::size_t i = 0; i < c1.size(); ++i) {
    const auto it = std::find(m.inducing().begin(), m.inducing().end(), c1.inducing()[i]);
    ASSERT_NE(it, m.inducing().end());
    EXPECT_EQ(c1.mean()(static_cast<Eigen::Index>(i)), m.mean()(it - m.inducing().begin()));
  }
  EXPECT_THROW(split_model(m, {}, l2), Error);
}

TEST(SplitModel, OverlapUsesPositiveSide) {
  GpEdfModel m(GpHyper{});
  // Group 1: wall y = 0 facing up; group 2: wall y = 1 facing up. Both boxes
  // widened by a vertical wall so (0.5, 0.5) lies in both.
  const std::vector<LineSegment> l1{make_segment_facing({0, 0}, {2, 0}, {1, 1}),
                                    make_segment_facing({0, 0}, {0, 2}, {1, 1})};
  const std::vector<LineSegment> l2{make_segment_facing({0, 0.9}, {2, 0.9}, {1, 2}),
                                    make_segment_facing({2, -1}, {2, 2}, {1, 1})};
  std::vector<LineSegment> all = l1;
  all.insert(all.end(), l2.begin(), l2.end());
  m.set_lines_unpruned(all);
  const std::vector<Point2> z{{0.5, 0.5}};
  m.select_inducing(z);
  // (0.5, 0.5): l1's nearest is x = 0 (0.5 m, positive); l2's nearest is y = 0.9 (0.4 m, negative).
  const auto [c1, c2] = split_model(m, l1, l2);
  EXPECT_EQ(c1.size(), 1u);
  EXPECT_EQ(c2.size(), 0u);
}

TEST(SplitModel, RandomizedConservation) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 100; ++t) {
    GpEdfModel m(GpHyper{});
    std::vector<LineSegment> lines;
    for (int i = 0; i < 6; ++i) lines.push_back(make_segment({u(rng), u(rng)}, {u(rng), u(rng)}));
    m.set_lines_unpruned(lines);
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({u(rng), u(rng)});
    m.select_inducing(pts);
    const std::size_t cut = 1 + t % 5;
    const auto [c1, c2] = split_model(m, {lines.begin(), lines.begin() + cut}, {lines.begin() + cut, lines.end()});
    ASSERT_EQ(c1.size() + c2.size(), m.size());
    std::vector<Point2> got = c1.inducing();
    got.insert(got.end(), c2.inducing().begin(), c2.inducing().end());
    auto key = [](const Point2& a, const Point2& b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); };
    std::vector<Point2> want = m.inducing();
    std::sort(got.begin(), got.end(), key);
    std::sort(want.begin(), want.end(), key);
    EXPECT_EQ(got, want);
  }
}

TEST(MergeModels, Examples) {
  const GpEdfModel m = two_room_model();
  const GpEdfModel empty(GpHyper{});
  const GpEdfModel same = merge_models(m, empty);
  EXPECT_EQ(same.inducing(), m.inducing());
  EXPECT_EQ(same.lines().size(), m.lines().size());

  const auto lines = m.lines();
  const auto [c1, c2] = split_model(m, {lines.begin(), lines.begin() + 4}, {lines.begin() + 4, lines.end()});
  const GpEdfModel back = merge_models(c1, c2);
  EXPECT_EQ(back.lines().size(), c1.lines().size() + c2.lines().size());
  EXPECT_EQ(back.size(), m.size());
  // Wall points of c1 stay close to the surface after merging.
  for (const auto& s : c1.lines())
    for (double t : {0.1, 0.5, 0.9}) {
      const Point2 p = s.p1 + (s.p2 - s.p1) * t;
      if (c1.query_distance(p).distance <= 0.1) EXPECT_LE(back.query_distance(p).distance, 0.1);
    }
  GpHyper other;
  other.rate = 50;
  EXPECT_THROW(merge_models(m, GpEdfModel(other)), Error);
}

TEST(ModelJson, RoundTrip) {
  const GpEdfModel m = two_room_model();
  for (bool cov : {false, true}) {
    const GpEdfModel back = model_from_json(nlohmann::json::parse(model_to_json(m, cov).dump()));
    EXPECT_EQ(back.room_id(), 4);
    EXPECT_EQ(back.inducing(), m.inducing());
    EXPECT_EQ(back.mean(), m.mean());
    EXPECT_EQ(back.has_cov(), cov);
    for (const Point2 p : {Point2{1.5, 1.2}, Point2{5.1, 1.8}, Point2{2, 0.5}})
      EXPECT_NEAR(back.query_distance(p).distance, m.query_distance(p).distance, 1e-12);
    if (cov) EXPECT_NEAR(back.query_distance({1.5, 1.2}).variance, m.query_distance({1.5, 1.2}).variance, 1e-12);
    else EXPECT_TRUE(std::isnan(back.query_distance({1.5, 1.2}).variance));
  }
}

}  // namespace
}  // namespace roomgp
