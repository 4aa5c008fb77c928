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

// roomgp command-line driver: simulate, run, bench, query.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roomgp/roomgp.hpp"

namespace {

using namespace roomgp;

struct SimulateArgs {
  std::string plan, traj, out, config;
  std::optional<int> beams;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  ScanParams scan;
  if (!a.config.empty()) {
    const RunConfig cfg = load_config(a.config);
    scan = cfg.scan;
    scan.seed = cfg.seed;
  }
  if (a.beams) scan.n_beams = *a.beams;
  if (a.seed) scan.seed = *a.seed;
  scan.validate();
  const auto frames = playback(load_floor_plan(a.plan), load_trajectory(a.traj), scan);
  write_scan_log(a.out, frames);
  std::size_t n = 0;
  for (const auto& f : frames) n += f.points.size();
  std::printf("wrote %zu frames, %zu points to %s\n", frames.size(), n, a.out.c_str());
  return 0;
}

struct RunArgs {
  std::string config, variant, svg, metrics, snapshot;
  bool snapshot_cov = false;
  bool no_contours = false;
  double contour_grid = 0.1;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (!a.variant.empty()) cfg.variant = parse_variant(a.variant);
  cfg.validate();
  const FloorPlan plan = load_floor_plan(cfg.plan_path);
  const auto frames = load_frames(cfg, plan);
  Pipeline p(cfg, prediction_points(plan, cfg.predict_batch, cfg.seed));
  run_frames(p, frames);

  if (!a.metrics.empty()) write_metrics_csv(a.metrics, cfg.variant, p.metrics());
  if (!a.svg.empty()) {
    SvgOptions opt;
    opt.contours = !a.no_contours;
    opt.grid = a.contour_grid;
    export_svg(scene_from_pipeline(p, opt), a.svg, opt);
  }
  if (!a.snapshot.empty()) {
    std::ofstream out(a.snapshot);
    if (!out) throw Error("cannot write snapshot '" + a.snapshot + "'");
    out << snapshot_to_json(p, a.snapshot_cov).dump(1) << '\n';
  }

  const FrameMetrics last = p.metrics().empty() ? FrameMetrics{} : p.metrics().back();
  std::printf("variant=%s frames=%zu points=%zu rooms=%d inducing=%zu segments=%zu\n", to_string(cfg.variant),
              p.metrics().size(), last.n_points, last.n_rooms, last.n_inducing, last.n_segments);
  if (cfg.variant == Variant::room_based && plan.has_room_labels() && !p.rooms().segments.empty()) {
    const auto q = segmentation_quality(p.rooms(), plan);
    std::printf("segmentation: k=%d ari=%.4f\n", q.k, q.ari);
  }
  return 0;
}

struct BenchArgs {
  std::string config, out, summary;
  std::size_t fit_min = 1000, fit_max = 20000;
};

int cmd_bench(const BenchArgs& a) {
  RunConfig cfg = load_config(a.config);
  cfg.validate();
  const FloorPlan plan = load_floor_plan(cfg.plan_path);
  // Every variant replays the same frames.
  const auto frames = load_frames(cfg, plan);
  const auto queries = prediction_points(plan, cfg.predict_batch, cfg.seed);

  const std::string summary_path = a.summary.empty() ? a.out + ".summary.csv" : a.summary;
  std::ofstream summary(summary_path);
  if (!summary) throw Error("cannot write '" + summary_path + "'");
  summary << "variant,update_slope,final_update_ms,seg_median_ms,seg_tail_max_ms\n";

  bool first = true;
  for (Variant v : {Variant::standard_global, Variant::line_global, Variant::room_based}) {
    RunConfig c = cfg;
    c.variant = v;
    Pipeline p(c, queries);
    run_frames(p, frames);
    write_metrics_csv(a.out, v, p.metrics(), first, !first);
    first = false;
    const BenchSummary s = summarize(v, p.metrics(), {a.fit_min, a.fit_max});
    char line[256];
    std::snprintf(line, sizeof line, "%s,%.4f,%.4f,%.4f,%.4f", to_string(v), s.update_slope, s.final_update_ms,
                  s.seg_median_ms, s.seg_tail_max_ms);
    summary << line << '\n';
    std::printf("%-16s slope=%.3f final_update_ms=%.3f seg_median_ms=%.3f seg_tail_max_ms=%.3f\n", to_string(v),
                s.update_slope, s.final_update_ms, s.seg_median_ms, s.seg_tail_max_ms);
  }
  std::printf("wrote %s and %s\n", a.out.c_str(), summary_path.c_str());
  return 0;
}

struct QueryArgs {
  std::string model;
  double x = 0.0, y = 0.0;
  bool matern = false;
};

int cmd_query(const QueryArgs& a) {
  const MapSnapshot snap = snapshot_from_json(detail::parse_json_file(a.model));
  const Point2 p{a.x, a.y};
  const GpEdfModel& m = snap.model_at(p);
  const auto d = m.query_distance(p, a.matern ? DistanceMode::matern_inverse : DistanceMode::log_transform);
  const auto g = m.query_gradient(p);
  const nlohmann::json out{{"room_id", m.room_id()},        {"x", a.x},
                           {"y", a.y},                      {"distance", d.distance},
                           {"variance", d.variance},        {"clamped", d.clamped},
                           {"gradient", {g.gradient.x, g.gradient.y}}, {"gradient_clamped", g.clamped}};
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomgp: room segmentation and room-based distance fields"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Ray-cast a trajectory through a floor plan into a scan log");
  s->add_option("--plan", sim.plan, "Floor plan JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--traj", sim.traj, "Trajectory JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "Output scan log (JSON lines)")->required();
  s->add_option("--config", sim.config, "Take scan parameters and seed from a run config")->check(CLI::ExistingFile);
  s->add_option("--beams", sim.beams, "Beams per scan");
  s->add_option("--seed", sim.seed, "Noise seed");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run one mapping variant over a config");
  r->add_option("--config", run.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  r->add_option("--variant", run.variant, "standard_global | line_global | room_based (overrides config)");
  r->add_option("--svg", run.svg, "Write the final map as SVG");
  r->add_option("--metrics", run.metrics, "Write per-frame metrics CSV");
  r->add_option("--snapshot", run.snapshot, "Write the final models as JSON");
  r->add_flag("--snapshot-cov", run.snapshot_cov, "Include posterior covariances in the snapshot");
  r->add_flag("--no-contours", run.no_contours, "Omit distance contours from the SVG");
  r->add_option("--contour-grid", run.contour_grid, "Contour sampling step in m")->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time all three variants on the same scan frames");
  b->add_option("--config", bench.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--out", bench.out, "Per-frame metrics CSV")->required();
  b->add_option("--summary", bench.summary, "Per-variant summary CSV (default: <out>.summary.csv)");
  b->add_option("--fit-min", bench.fit_min, "Smallest point count in the slope fit");
  b->add_option("--fit-max", bench.fit_max, "Largest point count in the slope fit");

  QueryArgs query;
  auto* q = app.add_subcommand("query", "Distance and gradient from a saved model or snapshot");
  q->add_option("--model", query.model, "Snapshot or model JSON")->required()->check(CLI::ExistingFile);
  q->add_option("--x", query.x, "Query x in m")->required();
  q->add_option("--y", query.y, "Query y in m")->required();
  q->add_flag("--matern", query.matern, "Invert the Matern-3/2 kernel instead of the log transform");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s) return cmd_simulate(sim);
    if (*r) return cmd_run(run);
    if (*b) return cmd_bench(bench);
    if (*q) return cmd_query(query);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
