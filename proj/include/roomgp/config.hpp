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
 * config.hpp
 *
 * Run configuration and its JSON form. Every section is optional; missing
 * keys keep their defaults, unknown keys are rejected. Relative paths are
 * resolved against the directory of the config file.
 *
 *   {
 *     "plan": "four_rooms.plan.json", "trajectory": "four_rooms.traj.json",
 *     "scan_log": null, "variant": "room_based", "seed": 0, "output_dir": ".",
 *     "predict_batch": 100,
 *     "scan": {...}, "lines": {...}, "segmentation": {...}, "gp": {...}
 *   }
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "roomgp/gpedf.hpp"
#include "roomgp/line_extraction.hpp"
#include "roomgp/room_segmentation.hpp"
#include "roomgp/world_sim.hpp"

namespace roomgp {

enum class Variant { standard_global, line_global, room_based };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::standard_global: return "standard_global";
    case Variant::line_global: return "line_global";
    case Variant::room_based: return "room_based";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "standard_global") return Variant::standard_global;
  if (s == "line_global") return Variant::line_global;
  if (s == "room_based") return Variant::room_based;
  throw Error("unknown variant '" + s + "' (expected standard_global, line_global or room_based)");
}

struct RunConfig {
  std::string plan_path;
  std::string trajectory_path;
  std::optional<std::string> scan_log_path;  // replaces simulation when set
  ScanParams scan;
  LineParams lines;
  SegConfig seg;
  GpHyper gp;
  Variant variant = Variant::room_based;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int predict_batch = 100;

  void validate() const {
    scan.validate();
    seg.validate();
    gp.validate();
    if (predict_batch < 0) throw Error("config: predict_batch must be >= 0");
    if (plan_path.empty()) throw Error("config: 'plan' is required");
    if (!std::filesystem::exists(plan_path)) throw Error("config: plan file '" + plan_path + "' does not exist");
    if (scan_log_path) {
      if (!std::filesystem::exists(*scan_log_path))
        throw Error("config: scan log '" + *scan_log_path + "' does not exist");
    } else {
      if (trajectory_path.empty()) throw Error("config: 'trajectory' or 'scan_log' is required");
      if (!std::filesystem::exists(trajectory_path))
        throw Error("config: trajectory file '" + trajectory_path + "' does not exist");
    }
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error("config." + name_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      dst = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error("config." + name_ + "." + key + ": wrong type");
    }
  }

  void angle_deg(const char* key, double& radians) {
    double deg = radians * 180.0 / std::numbers::pi;
    get(key, deg);
    radians = deg * std::numbers::pi / 180.0;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw Error("config." + name_ + ": unknown key '" + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  RunConfig c;
  detail::Section top(j, "root");
  top.get("plan", c.plan_path);
  top.get("trajectory", c.trajectory_path);
  if (j.contains("scan_log") && !j.at("scan_log").is_null()) c.scan_log_path = j.at("scan_log").get<std::string>();
  std::string variant = to_string(c.variant);
  top.get("variant", variant);
  c.variant = parse_variant(variant);
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  top.get("predict_batch", c.predict_batch);
  for (const char* k : {"scan_log", "scan", "lines", "segmentation", "gp"}) {
    nlohmann::json dummy;
    top.get(k, dummy);
  }
  top.finish();

  c.scan.seed = c.seed;
  if (j.contains("scan")) {
    detail::Section s(j.at("scan"), "scan");
    s.get("n_beams", c.scan.n_beams);
    s.angle_deg("fov_deg", c.scan.fov);
    s.get("max_range", c.scan.max_range);
    s.get("noise_sigma", c.scan.noise_sigma);
    s.finish();
  }
  if (j.contains("lines")) {
    detail::Section s(j.at("lines"), "lines");
    s.get("gap_threshold", c.lines.gap_threshold);
    s.get("split_deviation", c.lines.split_deviation);
    s.get("min_points", c.lines.min_points_per_segment);
    s.get("min_length", c.lines.min_length);
    s.angle_deg("merge_angle_deg", c.lines.merge_angle);
    s.get("merge_offset", c.lines.merge_offset);
    s.get("merge_gap", c.lines.merge_gap);
    s.finish();
  }
  if (j.contains("segmentation")) {
    detail::Section s(j.at("segmentation"), "segmentation");
    s.get("D_c", c.seg.corner_threshold);
    s.get("d_min", c.seg.doorway_min);
    s.get("d_max", c.seg.doorway_max);
    s.get("D_v", c.seg.visibility_radius);
    s.get("gamma_d", c.seg.gamma_d);
    s.get("gamma_r", c.seg.gamma_r);
    s.get("T_lambda", c.seg.fiedler_threshold);
    s.get("T_e", c.seg.edge_ratio_threshold);
    s.get("k_max", c.seg.k_max);
    s.get("L_min", c.seg.min_length);
    s.angle_deg("parallel_angle_deg", c.seg.parallel_angle);
    s.angle_deg("collinear_angle_deg", c.seg.collinear_angle);
    s.get("collinear_offset", c.seg.collinear_offset);
    s.finish();
  }
  if (j.contains("gp")) {
    detail::Section s(j.at("gp"), "gp");
    s.get("lambda", c.gp.rate);
    s.get("sigma2", c.gp.signal_var);
    s.get("noise_var", c.gp.noise_var);
    s.get("T_Z", c.gp.inducing_threshold);
    s.get("f_min", c.gp.f_min);
    s.get("fd_step", c.gp.fd_step);
    s.get("jitter", c.gp.jitter);
    s.get("prune_radius", c.gp.prune_radius);
    s.finish();
  }
  c.plan_path = detail::resolve_path(c.plan_path, base_dir);
  c.trajectory_path = detail::resolve_path(c.trajectory_path, base_dir);
  if (c.scan_log_path) c.scan_log_path = detail::resolve_path(*c.scan_log_path, base_dir);
  c.output_dir = detail::resolve_path(c.output_dir, base_dir);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  const auto j = detail::parse_json_file(path);
  try {
    return config_from_json(j, std::filesystem::path(path).parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  constexpr double deg = 180.0 / std::numbers::pi;
  nlohmann::json j{
      {"plan", c.plan_path},
      {"trajectory", c.trajectory_path},
      {"variant", to_string(c.variant)},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"predict_batch", c.predict_batch},
      {"scan",
       {{"n_beams", c.scan.n_beams}, {"fov_deg", c.scan.fov * deg}, {"max_range", c.scan.max_range},
        {"noise_sigma", c.scan.noise_sigma}}},
      {"lines",
       {{"gap_threshold", c.lines.gap_threshold},
        {"split_deviation", c.lines.split_deviation},
        {"min_points", c.lines.min_points_per_segment},
        {"min_length", c.lines.min_length},
        {"merge_angle_deg", c.lines.merge_angle * deg},
        {"merge_offset", c.lines.merge_offset},
        {"merge_gap", c.lines.merge_gap}}},
      {"segmentation",
       {{"D_c", c.seg.corner_threshold},
        {"d_min", c.seg.doorway_min},
        {"d_max", c.seg.doorway_max},
        {"D_v", c.seg.visibility_radius},
        {"gamma_d", c.seg.gamma_d},
        {"gamma_r", c.seg.gamma_r},
        {"T_lambda", c.seg.fiedler_threshold},
        {"T_e", c.seg.edge_ratio_threshold},
        {"k_max", c.seg.k_max},
        {"L_min", c.seg.min_length},
        {"parallel_angle_deg", c.seg.parallel_angle * deg},
        {"collinear_angle_deg", c.seg.collinear_angle * deg},
        {"collinear_offset", c.seg.collinear_offset}}},
      {"gp", hyper_to_json(c.gp)}};
  j["scan_log"] = c.scan_log_path ? nlohmann::json(*c.scan_log_path) : nlohmann::json(nullptr);
  return j;
}

}  // namespace roomgp
