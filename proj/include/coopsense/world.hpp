#ifndef COOPSENSE_WORLD_HPP_
#define COOPSENSE_WORLD_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "coopsense/geometry.hpp"
#include "coopsense/pointcloud.hpp"

namespace coopsense::sim {

enum class ActorKind : std::uint8_t {
  car = 0,
  pedestrian = 1,
  bicycle = 2,
  static_obstacle = 3,
};

const char* to_string(ActorKind kind);
ActorKind actor_kind_from_string(const std::string& name);
geom::ClassLabel class_of(ActorKind kind);

/// One waypoint of a piecewise-linear trajectory.
struct TrajectorySample {
  std::uint64_t t_us = 0;
  geom::Vec3 position;
  double yaw = 0.0;
};

/// Scripted scene participant. The shape is an oriented box in the body
/// frame; the trajectory is sampled by linear interpolation (shortest-arc
/// for yaw) and holds the final pose past its last sample.
struct Actor {
  int id = 0;
  ActorKind kind = ActorKind::car;
  geom::OrientedBox shape;
  std::vector<TrajectorySample> trajectory;

  geom::Pose pose_at(std::uint64_t t_us) const;
  geom::Vec3 velocity_at(std::uint64_t t_us) const;  // finite-difference of segment
  void validate() const;  // throws std::invalid_argument
};

struct ActorState {
  int id = 0;
  ActorKind kind = ActorKind::car;
  geom::Pose pose;
  geom::OrientedBox world_box;  // shape placed at pose
  geom::Vec3 velocity;
};

/// Immutable view of the world at one instant.
struct WorldSnapshot {
  std::uint64_t time_us = 0;
  std::vector<ActorState> actors;

  const ActorState* find(int actor_id) const;
};

/// Shared timebase for every simulated node.
struct WorldClock {
  std::uint64_t tick_period_us = 100000;
  std::uint64_t current_us = 0;
};

class World {
 public:
  World() = default;
  World(std::vector<Actor> actors, std::uint64_t tick_period_us);

  const WorldClock& clock() const { return clock_; }
  const std::vector<Actor>& actors() const { return actors_; }

  /// Snapshot at the current clock without advancing.
  WorldSnapshot snapshot() const;

  /// Advances the clock by dt and returns the new snapshot. dt must be > 0.
  WorldSnapshot step(std::uint64_t dt_us);

  /// Snapshot at time zero containing only static obstacles, for
  /// background capture.
  WorldSnapshot static_only_snapshot() const;

 private:
  WorldSnapshot snapshot_at(std::uint64_t t_us) const;

  std::vector<Actor> actors_;
  WorldClock clock_;
};

/// Dual GNSS antennas at fixed body-frame locations.
struct GnssPair {
  geom::Vec2 front;  // body frame, meters
  geom::Vec2 rear;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // antennas must be distinct
};

/// One pair of world-frame antenna fixes.
struct GnssReading {
  geom::Vec2 front;
  geom::Vec2 rear;
};

/// Simulates the two antenna fixes for a vehicle at `truth`.
GnssReading measure_gnss(const GnssPair& pair, const geom::Pose& truth,
                         std::uint64_t t_us);

/// Position is the antenna midpoint; yaw is the full-quadrant angle of the
/// rear-to-front baseline. Throws when the antennas coincide within 1e-6 m.
geom::Pose fuse_gnss(const GnssReading& reading);

/// Beam-grid lidar model: 360-degree azimuth sweep, fixed elevation rings,
/// range-limited, with seeded Gaussian range noise.
struct LidarConfig {
  std::string sensor_id = "lidar";
  geom::Vec3 mount;                       // body-frame offset for vehicle lidars
  double max_range = 20.0;                // meters
  double horizontal_resolution = 0.4 * geom::kPi / 180.0;  // radians per beam
  int channels = 16;
  double elevation_span = 30.0 * geom::kPi / 180.0;  // radians, centered on 0
  double noise_sigma = 0.01;              // meters
  std::uint64_t seed = 0;

  void validate() const;
};

struct BeamGrid {
  int azimuth_count = 0;
  int channels = 0;

  static BeamGrid from(const LidarConfig& config);
  int beam_count() const { return azimuth_count * channels; }
  std::uint32_t beam_id(int azimuth_index, int channel_index) const {
    return static_cast<std::uint32_t>(azimuth_index * channels + channel_index);
  }
  double azimuth(int azimuth_index) const;
  double elevation(int channel_index, double span) const;
  /// Unit direction in the sensor frame for one beam.
  geom::Vec3 direction(int azimuth_index, int channel_index, double span) const;
};

}  // namespace coopsense::sim

#endif  // COOPSENSE_WORLD_HPP_
