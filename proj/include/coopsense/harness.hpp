#ifndef COOPSENSE_HARNESS_HPP_
#define COOPSENSE_HARNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "coopsense/scenario.hpp"
#include "coopsense/v2i.hpp"

namespace coopsense::harness {

enum class Mode : std::uint8_t { solo = 0, coop = 1 };
enum class TransportKind : std::uint8_t { inproc = 0, udp = 1, severed = 2 };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);
const char* to_string(TransportKind kind);
TransportKind transport_from_string(const std::string& name);

struct RunOptions {
  Mode mode = Mode::coop;
  fuse::FusionMode fusion = fuse::FusionMode::feature;
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  TransportKind transport = TransportKind::inproc;
  std::optional<std::uint16_t> udp_port;
};

/// Per-tick time series entry. Overlap fields are NaN on ticks where the
/// corresponding source produced no detection matched to the target.
struct TickRecord {
  int tick = 0;
  double time_s = 0.0;
  double ego_target_distance = 0.0;  // ego center to target footprint, xy
  bool target_tracked = false;
  bool collision = false;
  double overlap_vehicle = 0.0;
  double overlap_road = 0.0;
  double overlap_fused = 0.0;
};

struct MetricsReport {
  std::string scenario;
  std::string mode;
  std::string fusion;
  std::uint64_t seed = 0;

  double first_detection_distance = 0.0;  // NaN when never detected
  double first_detection_time_s = 0.0;    // NaN when never detected
  double time_to_collision_at_first_detection = 0.0;  // NaN without both events
  double min_approach_distance = 0.0;
  bool collision_flag = false;

  double ego_speed_at_first_detection = 0.0;  // m/s, NaN when never detected
  double required_braking_distance_m = 0.0;
  bool braking_feasible = false;

  // Means over the ticks where every active source matched the target.
  double mean_overlap_vehicle = 0.0;
  double mean_overlap_road = 0.0;
  double mean_overlap_fused = 0.0;

  net::IngestStats ingest;
  std::vector<TickRecord> series;
};

/// Stopping distance v^2 / (2a) + v * t_react with a = 5.0 m/s^2 and
/// t_react = 0.69 s, so 30 km/h needs 12.7 m.
double required_braking_distance(double speed_mps);

struct AzimuthInterval {
  double start_deg = 0.0;
  double end_deg = 0.0;

  bool contains(double deg) const { return deg >= start_deg && deg <= end_deg; }
};

/// Sweeps the sensor's beam grid and reports the azimuth intervals whose
/// rays hit the blocker before max_range. Angles are ego-frame degrees
/// measured clockwise from straight ahead (positive to the right).
std::vector<AzimuthInterval> occlusion_profile(const geom::Pose& ego_pose,
                                               const geom::OrientedBox& blocker,
                                               const sim::LidarConfig& lidar);

/// Ego-frame azimuth of a world point, in right-handed clockwise degrees
/// ("30 degrees on the right" = +30).
double azimuth_right_deg(const geom::Pose& ego_pose, const geom::Vec3& point);

/// Runs a full scenario deterministically and collects metrics.
MetricsReport run_scenario(const ScenarioSpec& spec, const RunOptions& options);

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& json_text);
std::string report_to_csv(const MetricsReport& report);

/// Writes the report to a file; format is "json" or "csv".
void emit_report(const MetricsReport& report, const std::string& format,
                 const std::string& path);

}  // namespace coopsense::harness

#endif  // COOPSENSE_HARNESS_HPP_
