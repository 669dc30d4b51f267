#ifndef COOPSENSE_SCENARIO_HPP_
#define COOPSENSE_SCENARIO_HPP_

#include <string>
#include <vector>

#include "coopsense/detection.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/tracking.hpp"
#include "coopsense/world.hpp"

namespace coopsense::harness {

/// One scenario document: actors on scripted trajectories, the ego sensor
/// suite, the roadside unit, and pipeline parameters.
struct ScenarioSpec {
  std::string name;
  std::string description;
  std::uint64_t tick_period_us = 100000;
  int duration_ticks = 0;
  std::uint64_t seed = 0;
  int ego_actor_id = 0;
  int target_actor_id = 0;

  std::vector<sim::Actor> actors;  // ego included
  sim::GnssPair gnss;
  sim::LidarConfig vehicle_lidar;
  sim::LidarConfig road_lidar;
  geom::Pose roadside_pose;
  int roadside_cadence_ticks = 1;

  detect::DetectorConfig detector;
  track::TrackerConfig tracker;
  double iou_threshold = 0.3;

  const sim::Actor* find_actor(int id) const;
  void validate() const;  // throws std::invalid_argument with a field path
};

/// Parses a scenario document. Unknown fields are rejected.
ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario_file(const std::string& path);

/// Lists the *.json scenario files in a directory, sorted by name.
std::vector<std::string> list_scenario_files(const std::string& directory);

/// Resolves a scenario by name within a directory, or treats the argument
/// as a file path when it points at an existing file.
std::string resolve_scenario_path(const std::string& name_or_path,
                                  const std::string& scenarios_dir);

}  // namespace coopsense::harness

#endif  // COOPSENSE_SCENARIO_HPP_
