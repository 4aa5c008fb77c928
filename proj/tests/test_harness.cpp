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

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "roomgp/roomgp.hpp"
#include "test_util.hpp"

namespace roomgp {
namespace {

const std::string kData = ROOMGP_DATA_DIR;

RunConfig four_rooms(Variant v) {
  RunConfig cfg = load_config(kData + "/four_rooms.config.json");
  cfg.variant = v;
  return cfg;
}

/// One full run, cached per variant: the four-room log is reused by several tests.
const Pipeline& run_cached(Variant v) {
  static std::map<Variant, std::unique_ptr<Pipeline>> cache;
  auto& slot = cache[v];
  if (!slot) {
    const RunConfig cfg = four_rooms(v);
    const FloorPlan plan = load_floor_plan(cfg.plan_path);
    slot = std::make_unique<Pipeline>(cfg, prediction_points(plan, cfg.predict_batch, cfg.seed));
    run_frames(*slot, load_frames(cfg, plan));
  }
  return *slot;
}

// --- Config ------------------------------------------------------------------

TEST(Config, Defaults) {
  const RunConfig c = config_from_json(nlohmann::json::parse(R"({"plan":"p.json","trajectory":"t.json"})"));
  EXPECT_DOUBLE_EQ(c.seg.corner_threshold, 0.4);
  EXPECT_DOUBLE_EQ(c.seg.doorway_min, 0.8);
  EXPECT_DOUBLE_EQ(c.seg.doorway_max, 3.0);
  EXPECT_DOUBLE_EQ(c.seg.visibility_radius, 8.0);
  EXPECT_DOUBLE_EQ(c.seg.gamma_r, 0.005);
  EXPECT_DOUBLE_EQ(c.seg.gamma_d, 0.02);
  EXPECT_DOUBLE_EQ(c.seg.fiedler_threshold, 0.18);
  EXPECT_DOUBLE_EQ(c.seg.edge_ratio_threshold, 0.5);
  EXPECT_DOUBLE_EQ(c.gp.rate, 100.0);
  EXPECT_DOUBLE_EQ(c.gp.inducing_threshold, 1e-6);
  EXPECT_EQ(c.variant, Variant::room_based);
  EXPECT_EQ(c.predict_batch, 100);
}

TEST(Config, OverridesAndRoundTrip) {
  const auto j = nlohmann::json::parse(R"({"plan":"p.json","trajectory":"t.json","variant":"line_global",
    "scan":{"n_beams":720,"fov_deg":180},"segmentation":{"D_c":0.3,"T_e":0.4},"gp":{"lambda":50,"T_Z":1e-5}})");
  const RunConfig c = config_from_json(j);
  EXPECT_EQ(c.variant, Variant::line_global);
  EXPECT_EQ(c.scan.n_beams, 720);
  EXPECT_NEAR(c.scan.fov, std::numbers::pi, 1e-12);
  EXPECT_DOUBLE_EQ(c.seg.corner_threshold, 0.3);
  EXPECT_DOUBLE_EQ(c.seg.edge_ratio_threshold, 0.4);
  EXPECT_DOUBLE_EQ(c.gp.rate, 50);
  const RunConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.scan.n_beams, 720);
  EXPECT_DOUBLE_EQ(back.seg.corner_threshold, 0.3);
  EXPECT_DOUBLE_EQ(back.gp.inducing_threshold, 1e-5);
}

TEST(Config, UnknownKeysAndBadValuesRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"plan":"p","trajectory":"t","bogus":1})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"plan":"p","trajectory":"t","gp":{"lamda":1}})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"plan":"p","trajectory":"t","variant":"fancy"})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"plan":"p","trajectory":"t","scan":{"n_beams":"x"}})")),
               Error);
  RunConfig c = config_from_json(nlohmann::json::parse(R"({"plan":"/nonexistent","trajectory":"t"})"));
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, PathsResolveAgainstConfigDirectory) {
  const RunConfig c = four_rooms(Variant::room_based);
  EXPECT_TRUE(std::filesystem::exists(c.plan_path));
  EXPECT_TRUE(std::filesystem::exists(c.trajectory_path));
  EXPECT_NO_THROW(c.validate());
}

// --- Metrics -----------------------------------------------------------------

TEST(Ari, Examples) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  const std::vector<int> relabeled{5, 5, 3, 3, 9, 9};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, a), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, relabeled), 1.0);
  // Hand-computed: contingency {2,1,1} / {1,1,...}.
  const std::vector<int> b{0, 0, 0, 1, 1, 1}, c{0, 0, 1, 1, 2, 2};
  // index = C(2,2) + C(1,2) + C(1,2) + C(2,2) = 2; sum_r = 3 + 3 = 6; sum_c = 3; n2 = 15.
  // expected = 6 * 3 / 15 = 1.2; max = 4.5 -> (2 - 1.2) / (4.5 - 1.2).
  EXPECT_NEAR(adjusted_rand_index(b, c), 0.8 / 3.3, 1e-12);

  // Random labels over two balanced rooms: ARI near 0 on average.
  std::mt19937_64 rng(1);
  std::vector<int> truth(200);
  for (int i = 0; i < 200; ++i) truth[i] = i < 100 ? 0 : 1;
  double mean = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<int> guess(200);
    for (auto& g : guess) g = static_cast<int>(rng() % 2);
    mean += adjusted_rand_index(truth, guess) / 200;
  }
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(LoglogSlope, RecoversPowerLaw) {
  std::vector<double> x, y;
  for (double n = 1000; n <= 20000; n *= 1.5) {
    x.push_back(n);
    y.push_back(3e-9 * n * n * n);
  }
  EXPECT_NEAR(loglog_slope(x, y), 3.0, 1e-9);
}

TEST(Summarize, FitWindowAndTail) {
  std::vector<FrameMetrics> rows;
  for (int i = 0; i < 20; ++i) {
    FrameMetrics m;
    m.frame = i;
    m.n_points = 500 + 1500 * static_cast<std::size_t>(i);
    m.update_ms = i == 0 ? 1000.0 : 1e-6 * static_cast<double>(m.n_points) * static_cast<double>(m.n_points);
    m.segmentation_ms = i >= 18 ? 4.0 : 2.0;
    rows.push_back(m);
  }
  const BenchSummary s = summarize(Variant::standard_global, rows);
  EXPECT_NEAR(s.update_slope, 2.0, 1e-9);  // warm-up frame excluded
  EXPECT_DOUBLE_EQ(s.seg_median_ms, 2.0);
  EXPECT_DOUBLE_EQ(s.seg_tail_max_ms, 4.0);
  EXPECT_DOUBLE_EQ(s.final_update_ms, rows.back().update_ms);
}

// --- Pipeline ----------------------------------------------------------------

TEST(Pipeline, RoomBasedFindsFourRooms) {
  const Pipeline& p = run_cached(Variant::room_based);
  const auto q = segmentation_quality(p.rooms(), load_floor_plan(p.config().plan_path));
  EXPECT_EQ(q.k, 4);
  EXPECT_GE(q.ari, 0.9);
  EXPECT_EQ(p.metrics().back().n_rooms, 4);
  EXPECT_EQ(p.models().size(), 4u);
}

TEST(Pipeline, StandardVariantContract) {
  const Pipeline& p = run_cached(Variant::standard_global);
  for (const auto& m : p.metrics()) {
    EXPECT_EQ(m.n_rooms, 1);
    EXPECT_EQ(m.n_segments, 0u);
    EXPECT_EQ(m.segmentation_ms, 0.0);
  }
  EXPECT_GT(p.metrics().back().n_inducing, 0u);
}

TEST(Pipeline, LineVariantHasOneModel) {
  const Pipeline& p = run_cached(Variant::line_global);
  EXPECT_EQ(p.models().size(), 1u);
  for (const auto& m : p.metrics()) EXPECT_EQ(m.n_rooms, 1);
  EXPECT_GT(p.metrics().back().n_segments, 0u);
}

TEST(Pipeline, CountsMonotoneAndTimesNonNegative) {
  for (Variant v : {Variant::standard_global, Variant::line_global, Variant::room_based}) {
    const auto& rows = run_cached(v).metrics();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].update_ms, 0.0);
      EXPECT_GE(rows[i].predict_ms, 0.0);
      EXPECT_GE(rows[i].segmentation_ms, 0.0);
      if (i) EXPECT_GE(rows[i].n_points, rows[i - 1].n_points);
    }
  }
}

TEST(Pipeline, DeterministicCounts) {
  const RunConfig cfg = four_rooms(Variant::room_based);
  const FloorPlan plan = load_floor_plan(cfg.plan_path);
  Pipeline again(cfg, prediction_points(plan, cfg.predict_batch, cfg.seed));
  run_frames(again, load_frames(cfg, plan));
  const auto& a = run_cached(Variant::room_based).metrics();
  const auto& b = again.metrics();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].n_points, b[i].n_points);
    EXPECT_EQ(a[i].n_rooms, b[i].n_rooms);
    EXPECT_EQ(a[i].n_inducing, b[i].n_inducing);
    EXPECT_EQ(a[i].n_segments, b[i].n_segments);
  }
}

TEST(Pipeline, RoomBasedQueriesOneModel) {
  const Pipeline& p = run_cached(Variant::room_based);
  const FloorPlan plan = load_floor_plan(p.config().plan_path);
  for (const auto& q : prediction_points(plan, 50, 7)) {
    const GpEdfModel* m = p.model_at(q);
    ASSERT_NE(m, nullptr);
    const auto d = p.query(q);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->distance, m->query_distance(q).distance);
  }
}

// --- CSV ---------------------------------------------------------------------

TEST(Csv, HeaderAndRows) {
  EXPECT_STREQ(kMetricsHeader,
               "variant,frame,n_points,update_ms,predict_ms,segmentation_ms,n_rooms,n_inducing,n_segments");
  const std::string path = oracle::temp_path("metrics.csv");
  std::size_t frames = 0;
  bool first = true;
  for (Variant v : {Variant::standard_global, Variant::line_global, Variant::room_based}) {
    const auto& rows = run_cached(v).metrics();
    frames = rows.size();
    write_metrics_csv(path, v, rows, first, !first);
    first = false;
  }
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kMetricsHeader);
  std::size_t n = 0;
  const std::regex row(R"(^(standard_global|line_global|room_based),\d+,\d+,[0-9.]+,[0-9.]+,[0-9.]+,\d+,\d+,\d+$)");
  while (std::getline(in, line)) {
    EXPECT_TRUE(std::regex_match(line, row)) << line;
    ++n;
  }
  EXPECT_EQ(n, 3 * frames);
  std::filesystem::remove(path);
}

// --- SVG ---------------------------------------------------------------------

std::set<std::string> segment_strokes(const std::string& svg) {
  std::set<std::string> out;
  const std::regex re(R"re(<line class="segment"[^>]*stroke="([^"]+)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1]);
  return out;
}

TEST(Svg, FourRoomsFourColors) {
  const Pipeline& p = run_cached(Variant::room_based);
  SvgOptions opt;
  opt.contours = false;
  const std::string svg = render_svg(scene_from_pipeline(p, opt), opt);
  EXPECT_EQ(segment_strokes(svg).size(), 4u);
  EXPECT_EQ(svg.find("class=\"contour\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"robot\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"connectivity\""), std::string::npos);
}

TEST(Svg, LowestContourHugsWalls) {
  const Pipeline& p = run_cached(Variant::room_based);
  SvgOptions opt;
  const SvgScene scene = scene_from_pipeline(p, opt);
  ASSERT_FALSE(scene.contours.empty());
  const ContourSet& lowest = scene.contours.front();
  EXPECT_DOUBLE_EQ(lowest.level, 0.05);
  ASSERT_FALSE(lowest.segments.empty());
  const std::vector<LineSegment>& segs = p.rooms().segments;
  std::size_t far = 0, total = 0;
  for (const auto& [a, b] : lowest.segments)
    for (const Point2& v : {a, b}) {
      ++total;
      std::vector<oracle::P> pts;
      for (const auto& r : p.residual_points()) pts.push_back({r.x, r.y});
      if (oracle::brute_distance({v.x, v.y}, segs, pts) > 0.15) ++far;
    }
  EXPECT_EQ(far, 0u) << far << " of " << total << " vertices";
  const std::string svg = render_svg(scene, opt);
  EXPECT_NE(svg.find("class=\"contour\""), std::string::npos);
}

TEST(Svg, MarchingSquaresCircle) {
  // Level set of |x| = 1 sampled on a 0.05 grid.
  const auto segs = marching_squares([](const Point2& x) { return norm(x); }, Aabb{{-2, -2}, {2, 2}}, 0.05, 1.0);
  ASSERT_FALSE(segs.empty());
  for (const auto& [a, b] : segs) {
    EXPECT_NEAR(norm(a), 1.0, 0.01);
    EXPECT_NEAR(norm(b), 1.0, 0.01);
  }
}

TEST(Svg, Errors) {
  EXPECT_THROW(render_svg(SvgScene{}), Error);
  SvgScene s;
  s.segments = {make_segment({0, 0}, {1, 0})};
  EXPECT_THROW(export_svg(s, "/nonexistent/dir/out.svg"), Error);
  s.labels = {0, 1};
  EXPECT_THROW(render_svg(s), Error);
}

// --- Snapshot ----------------------------------------------------------------

TEST(Snapshot, RoundTripAnswersLikeThePipeline) {
  const Pipeline& p = run_cached(Variant::room_based);
  const MapSnapshot snap = snapshot_from_json(nlohmann::json::parse(snapshot_to_json(p).dump()));
  EXPECT_EQ(snap.models().size(), p.models().size());
  const FloorPlan plan = load_floor_plan(p.config().plan_path);
  for (const auto& q : prediction_points(plan, 30, 11)) {
    const GpEdfModel& m = snap.model_at(q);
    EXPECT_EQ(m.room_id(), p.model_at(q)->room_id());
    EXPECT_NEAR(m.query_distance(q).distance, p.query(q)->distance, 1e-9);
  }
}

TEST(Snapshot, DuplicateRoomRejected) {
  const Pipeline& p = run_cached(Variant::room_based);
  nlohmann::json j = snapshot_to_json(p);
  j["rooms"].push_back(j["rooms"][0]);
  EXPECT_THROW(snapshot_from_json(j), Error);
}

}  // namespace
}  // namespace roomgp
