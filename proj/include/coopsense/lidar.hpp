#ifndef COOPSENSE_LIDAR_HPP_
#define COOPSENSE_LIDAR_HPP_

#include <limits>
#include <vector>

#include "coopsense/pointcloud.hpp"
#include "coopsense/world.hpp"

namespace coopsense::sim {

/// Per-beam range image of a static scene, used for background subtraction.
/// Beams with no return hold +inf.
struct BackgroundScan {
  int azimuth_count = 0;
  int channels = 0;
  std::vector<double> range_by_beam;

  static constexpr double kNoReturn = std::numeric_limits<double>::infinity();
  int beam_count() const { return azimuth_count * channels; }
};

/// Casts every beam of the grid against the snapshot's actor boxes and
/// returns the nearest hit per beam within max_range, with seeded Gaussian
/// range noise (clamped to 4 sigma). Points are in the sensor frame; beams
/// with no hit emit nothing. Nearer actors occlude farther ones.
/// `exclude_actor_id` skips the carrying vehicle's own body.
///
/// Deterministic in (config.seed, snapshot time, beam index): the parallel
/// and serial paths produce bit-identical clouds.
PointCloud scan_lidar(const LidarConfig& config, const geom::Pose& sensor_pose,
                      const WorldSnapshot& snapshot, int exclude_actor_id = -1);

/// Serial reference for scan_lidar, kept for testing and benchmarking.
PointCloud scan_lidar_serial(const LidarConfig& config,
                             const geom::Pose& sensor_pose,
                             const WorldSnapshot& snapshot,
                             int exclude_actor_id = -1);

/// Scans a statics-only snapshot to build the background reference.
/// Throws if the snapshot contains a movable actor.
PointCloud capture_background(const LidarConfig& config,
                              const geom::Pose& sensor_pose,
                              const WorldSnapshot& statics_snapshot);

/// Indexes a background capture per beam. The cloud must carry beam ids
/// from the given grid.
BackgroundScan background_from_cloud(const PointCloud& cloud, const BeamGrid& grid);

/// Entry distance of a ray into an oriented box, or a negative value on
/// miss. Origin and direction are in the world frame; direction must be
/// unit length.
double ray_box_entry(const geom::Vec3& origin, const geom::Vec3& dir,
                     const geom::OrientedBox& box, double max_range);

}  // namespace coopsense::sim

#endif  // COOPSENSE_LIDAR_HPP_
