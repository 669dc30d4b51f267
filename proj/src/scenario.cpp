#include "coopsense/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace coopsense::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& message) {
  throw std::invalid_argument("scenario: " + context + ": " + message);
}

void reject_unknown_fields(const json& object, const std::set<std::string>& allowed,
                           const std::string& context) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      fail(context, "unknown field '" + key + "'");
    }
  }
}

double require_number(const json& object, const std::string& key,
                      const std::string& context) {
  if (!object.contains(key)) fail(context, "missing field '" + key + "'");
  if (!object[key].is_number()) fail(context, "field '" + key + "' must be a number");
  return object[key].get<double>();
}

double optional_number(const json& object, const std::string& key, double fallback,
                       const std::string& context) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number()) fail(context, "field '" + key + "' must be a number");
  return object[key].get<double>();
}

std::string require_string(const json& object, const std::string& key,
                           const std::string& context) {
  if (!object.contains(key)) fail(context, "missing field '" + key + "'");
  if (!object[key].is_string()) fail(context, "field '" + key + "' must be a string");
  return object[key].get<std::string>();
}

geom::Vec3 parse_vec(const json& value, const std::string& context,
                     bool z_optional = false) {
  if (!value.is_array() || value.size() < (z_optional ? 2u : 3u) || value.size() > 3u) {
    fail(context, z_optional ? "expected [x, y] or [x, y, z]" : "expected [x, y, z]");
  }
  geom::Vec3 v;
  v.x = value[0].get<double>();
  v.y = value[1].get<double>();
  v.z = value.size() == 3 ? value[2].get<double>() : 0.0;
  return v;
}

std::vector<sim::TrajectorySample> parse_waypoints(const json& value,
                                                   const std::string& context) {
  if (!value.is_array() || value.empty()) {
    fail(context, "waypoints must be a non-empty array");
  }
  std::vector<sim::TrajectorySample> samples;
  samples.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string wp_context = context + "[" + std::to_string(i) + "]";
    const json& wp = value[i];
    if (!wp.is_object()) fail(wp_context, "waypoint must be an object");
    reject_unknown_fields(wp, {"t", "pos", "yaw"}, wp_context);
    sim::TrajectorySample sample;
    const double t_s = require_number(wp, "t", wp_context);
    if (t_s < 0.0) fail(wp_context, "t must be >= 0 seconds");
    sample.t_us = static_cast<std::uint64_t>(t_s * 1e6 + 0.5);
    if (!wp.contains("pos")) fail(wp_context, "missing field 'pos'");
    sample.position = parse_vec(wp["pos"], wp_context + ".pos", /*z_optional=*/true);
    sample.yaw = optional_number(wp, "yaw", 0.0, wp_context);
    samples.push_back(sample);
  }
  return samples;
}

sim::Actor parse_actor(const json& value, const std::string& context,
                       sim::ActorKind default_kind) {
  if (!value.is_object()) fail(context, "actor must be an object");
  reject_unknown_fields(value, {"id", "kind", "size", "waypoints"}, context);
  sim::Actor actor;
  actor.id = static_cast<int>(require_number(value, "id", context));
  actor.kind = value.contains("kind")
                   ? sim::actor_kind_from_string(require_string(value, "kind", context))
                   : default_kind;
  if (!value.contains("size")) fail(context, "missing field 'size'");
  const geom::Vec3 size = parse_vec(value["size"], context + ".size");
  if (!(size.x > 0.0 && size.y > 0.0 && size.z > 0.0)) {
    fail(context, "size components must be positive");
  }
  actor.shape.extent = size * 0.5;
  actor.shape.center = {0.0, 0.0, size.z * 0.5};  // box sits on the ground
  actor.shape.label = sim::class_of(actor.kind);
  if (!value.contains("waypoints")) fail(context, "missing field 'waypoints'");
  actor.trajectory = parse_waypoints(value["waypoints"], context + ".waypoints");
  return actor;
}

sim::LidarConfig parse_lidar(const json& value, const std::string& context,
                             bool allow_mount) {
  if (!value.is_object()) fail(context, "lidar must be an object");
  std::set<std::string> allowed = {"id",       "max_range",          "channels",
                                   "noise_sigma", "horizontal_resolution_deg",
                                   "elevation_span_deg"};
  if (allow_mount) allowed.insert("mount");
  reject_unknown_fields(value, allowed, context);

  sim::LidarConfig config;
  config.sensor_id = require_string(value, "id", context);
  config.max_range = require_number(value, "max_range", context);
  if (allow_mount) {
    if (!value.contains("mount")) fail(context, "missing field 'mount'");
    config.mount = parse_vec(value["mount"], context + ".mount");
  }
  config.horizontal_resolution =
      optional_number(value, "horizontal_resolution_deg", 0.4, context) * geom::kPi /
      180.0;
  config.channels = static_cast<int>(optional_number(value, "channels", 16, context));
  config.elevation_span =
      optional_number(value, "elevation_span_deg", 30.0, context) * geom::kPi / 180.0;
  config.noise_sigma = optional_number(value, "noise_sigma", 0.01, context);
  config.validate();
  return config;
}

}  // namespace

const sim::Actor* ScenarioSpec::find_actor(int id) const {
  for (const auto& actor : actors) {
    if (actor.id == id) return &actor;
  }
  return nullptr;
}

void ScenarioSpec::validate() const {
  if (name.empty()) fail("name", "must not be empty");
  if (duration_ticks <= 0) fail("duration_ticks", "must be positive");
  if (tick_period_us == 0) fail("tick_period_us", "must be positive");
  std::set<int> ids;
  for (const auto& actor : actors) {
    actor.validate();
    if (!ids.insert(actor.id).second) {
      fail("actors", "duplicate actor id " + std::to_string(actor.id));
    }
  }
  if (find_actor(ego_actor_id) == nullptr) {
    fail("ego.id", "references no actor");
  }
  if (find_actor(target_actor_id) == nullptr) {
    fail("target_id", "references no actor");
  }
  gnss.validate();
  vehicle_lidar.validate();
  road_lidar.validate();
  detector.validate();
  tracker.validate();
  if (roadside_cadence_ticks < 1) fail("roadside.cadence_ticks", "must be >= 1");
  if (iou_threshold <= 0.0) fail("fusion.iou_threshold", "must be positive");
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("document", "top level must be an object");
  reject_unknown_fields(doc,
                        {"name", "description", "tick_period_us", "duration_ticks",
                         "seed", "target_id", "ego", "roadside", "actors", "detector",
                         "tracker", "fusion"},
                        "document");

  ScenarioSpec spec;
  spec.name = require_string(doc, "name", "document");
  if (doc.contains("description")) {
    spec.description = require_string(doc, "description", "document");
  }
  spec.tick_period_us = static_cast<std::uint64_t>(
      optional_number(doc, "tick_period_us", 100000.0, "document"));
  spec.duration_ticks =
      static_cast<int>(require_number(doc, "duration_ticks", "document"));
  spec.seed =
      static_cast<std::uint64_t>(optional_number(doc, "seed", 0.0, "document"));
  spec.target_actor_id = static_cast<int>(require_number(doc, "target_id", "document"));

  if (!doc.contains("ego")) fail("document", "missing field 'ego'");
  const json& ego = doc["ego"];
  reject_unknown_fields(ego, {"id", "size", "waypoints", "gnss", "lidar"}, "ego");
  {
    if (!ego.contains("id")) fail("ego", "missing field 'id'");
    json ego_actor;
    ego_actor["id"] = ego["id"];
    if (ego.contains("size")) ego_actor["size"] = ego["size"];
    if (ego.contains("waypoints")) ego_actor["waypoints"] = ego["waypoints"];
    spec.actors.push_back(parse_actor(ego_actor, "ego", sim::ActorKind::car));
    spec.ego_actor_id = spec.actors.back().id;
  }
  if (!ego.contains("gnss")) fail("ego", "missing field 'gnss'");
  {
    const json& gnss = ego["gnss"];
    reject_unknown_fields(gnss, {"front", "rear", "noise_sigma"}, "ego.gnss");
    if (!gnss.contains("front") || !gnss.contains("rear")) {
      fail("ego.gnss", "missing antenna positions");
    }
    const geom::Vec3 front = parse_vec(gnss["front"], "ego.gnss.front", true);
    const geom::Vec3 rear = parse_vec(gnss["rear"], "ego.gnss.rear", true);
    spec.gnss.front = {front.x, front.y};
    spec.gnss.rear = {rear.x, rear.y};
    spec.gnss.noise_sigma = optional_number(gnss, "noise_sigma", 0.0, "ego.gnss");
  }
  if (!ego.contains("lidar")) fail("ego", "missing field 'lidar'");
  spec.vehicle_lidar = parse_lidar(ego["lidar"], "ego.lidar", /*allow_mount=*/true);

  if (!doc.contains("roadside")) fail("document", "missing field 'roadside'");
  const json& roadside = doc["roadside"];
  reject_unknown_fields(roadside, {"lidar", "pose", "cadence_ticks"}, "roadside");
  if (!roadside.contains("lidar")) fail("roadside", "missing field 'lidar'");
  spec.road_lidar = parse_lidar(roadside["lidar"], "roadside.lidar", false);
  if (!roadside.contains("pose")) fail("roadside", "missing field 'pose'");
  {
    const json& pose = roadside["pose"];
    reject_unknown_fields(pose, {"pos", "yaw"}, "roadside.pose");
    if (!pose.contains("pos")) fail("roadside.pose", "missing field 'pos'");
    spec.roadside_pose.position = parse_vec(pose["pos"], "roadside.pose.pos");
    spec.roadside_pose.yaw = optional_number(pose, "yaw", 0.0, "roadside.pose");
  }
  spec.roadside_cadence_ticks =
      static_cast<int>(optional_number(roadside, "cadence_ticks", 1.0, "roadside"));

  if (doc.contains("actors")) {
    if (!doc["actors"].is_array()) fail("actors", "must be an array");
    for (std::size_t i = 0; i < doc["actors"].size(); ++i) {
      spec.actors.push_back(parse_actor(doc["actors"][i],
                                        "actors[" + std::to_string(i) + "]",
                                        sim::ActorKind::car));
    }
  }

  if (doc.contains("detector")) {
    const json& det = doc["detector"];
    reject_unknown_fields(det,
                          {"cluster_radius", "min_cluster_size", "background_tolerance"},
                          "detector");
    spec.detector.cluster_radius =
        optional_number(det, "cluster_radius", spec.detector.cluster_radius, "detector");
    spec.detector.min_cluster_size = static_cast<int>(optional_number(
        det, "min_cluster_size", spec.detector.min_cluster_size, "detector"));
    spec.detector.background_tolerance = optional_number(
        det, "background_tolerance", spec.detector.background_tolerance, "detector");
  }
  if (doc.contains("tracker")) {
    const json& trk = doc["tracker"];
    reject_unknown_fields(
        trk, {"gate_distance", "smoothing_factor", "max_misses", "min_hits"}, "tracker");
    spec.tracker.gate_distance =
        optional_number(trk, "gate_distance", spec.tracker.gate_distance, "tracker");
    spec.tracker.smoothing_factor = optional_number(
        trk, "smoothing_factor", spec.tracker.smoothing_factor, "tracker");
    spec.tracker.max_misses = static_cast<int>(
        optional_number(trk, "max_misses", spec.tracker.max_misses, "tracker"));
    spec.tracker.min_hits = static_cast<int>(
        optional_number(trk, "min_hits", spec.tracker.min_hits, "tracker"));
  }
  if (doc.contains("fusion")) {
    const json& fus = doc["fusion"];
    reject_unknown_fields(fus, {"iou_threshold"}, "fusion");
    spec.iou_threshold =
        optional_number(fus, "iou_threshold", spec.iou_threshold, "fusion");
  }

  spec.validate();
  return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("scenario: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::vector<std::string> list_scenario_files(const std::string& directory) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (!fs::is_directory(directory)) return files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string resolve_scenario_path(const std::string& name_or_path,
                                  const std::string& scenarios_dir) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name_or_path)) return name_or_path;
  const fs::path candidate = fs::path(scenarios_dir) / (name_or_path + ".json");
  if (fs::is_regular_file(candidate)) return candidate.string();
  throw std::invalid_argument("scenario: '" + name_or_path +
                              "' is neither a file nor a name under " + scenarios_dir);
}

}  // namespace coopsense::harness
