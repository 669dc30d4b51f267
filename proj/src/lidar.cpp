#include "coopsense/lidar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coopsense/rng.hpp"

namespace coopsense::sim {

namespace {

// Actor box unpacked for the inner loop.
struct BoxTarget {
  geom::Vec3 center;
  geom::Vec3 extent;
  double cos_neg_yaw;
  double sin_neg_yaw;
};

std::vector<BoxTarget> collect_targets(const WorldSnapshot& snapshot,
                                       int exclude_actor_id) {
  std::vector<BoxTarget> targets;
  targets.reserve(snapshot.actors.size());
  for (const auto& state : snapshot.actors) {
    if (state.id == exclude_actor_id) continue;
    BoxTarget t;
    t.center = state.world_box.center;
    t.extent = state.world_box.extent;
    t.cos_neg_yaw = std::cos(-state.world_box.yaw);
    t.sin_neg_yaw = std::sin(-state.world_box.yaw);
    targets.push_back(t);
  }
  return targets;
}

// Slab test against one box, in the box frame. Returns the entry distance
// or -1 on miss.
inline double slab_entry(const geom::Vec3& origin, const geom::Vec3& dir,
                         const BoxTarget& box, double max_range) {
  const geom::Vec3 rel = origin - box.center;
  const double ox = rel.x * box.cos_neg_yaw - rel.y * box.sin_neg_yaw;
  const double oy = rel.x * box.sin_neg_yaw + rel.y * box.cos_neg_yaw;
  const double dx = dir.x * box.cos_neg_yaw - dir.y * box.sin_neg_yaw;
  const double dy = dir.x * box.sin_neg_yaw + dir.y * box.cos_neg_yaw;

  double tmin = 0.0;
  double tmax = max_range;
  const double o[3] = {ox, oy, rel.z};
  const double d[3] = {dx, dy, dir.z};
  const double e[3] = {box.extent.x, box.extent.y, box.extent.z};
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(d[axis]) < 1e-12) {
      if (o[axis] < -e[axis] || o[axis] > e[axis]) return -1.0;
      continue;
    }
    const double inv = 1.0 / d[axis];
    double t1 = (-e[axis] - o[axis]) * inv;
    double t2 = (e[axis] - o[axis]) * inv;
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return -1.0;
  }
  return tmin > 1e-9 ? tmin : -1.0;
}

// Nearest hit over all targets for one beam; kNoReturn on miss. Noise is
// keyed on (seed, timestamp, beam) so the result does not depend on which
// thread runs the beam.
inline double beam_range(const geom::Vec3& origin, const geom::Vec3& dir,
                         const std::vector<BoxTarget>& targets,
                         const LidarConfig& config, std::uint64_t timestamp_us,
                         std::uint32_t beam) {
  double nearest = BackgroundScan::kNoReturn;
  for (const auto& box : targets) {
    const double t = slab_entry(origin, dir, box, config.max_range);
    if (t > 0.0 && t < nearest) nearest = t;
  }
  if (nearest == BackgroundScan::kNoReturn) return nearest;
  if (config.noise_sigma > 0.0) {
    nearest += config.noise_sigma *
               rng::gaussian(config.seed, timestamp_us, beam);
    nearest = std::max(nearest, 1e-3);
  }
  return nearest;
}

PointCloud compact_ranges(const std::vector<double>& ranges, const BeamGrid& grid,
                          const LidarConfig& config, std::uint64_t timestamp_us) {
  PointCloud cloud;
  cloud.frame = Frame::sensor;
  cloud.timestamp_us = timestamp_us;
  cloud.source = config.sensor_id;
  for (int az = 0; az < grid.azimuth_count; ++az) {
    for (int ch = 0; ch < grid.channels; ++ch) {
      const std::uint32_t beam = grid.beam_id(az, ch);
      const double r = ranges[beam];
      if (r == BackgroundScan::kNoReturn) continue;
      const geom::Vec3 dir = grid.direction(az, ch, config.elevation_span);
      cloud.points.push_back(dir * r);
      cloud.beam_ids.push_back(beam);
    }
  }
  return cloud;
}

}  // namespace

double ray_box_entry(const geom::Vec3& origin, const geom::Vec3& dir,
                     const geom::OrientedBox& box, double max_range) {
  BoxTarget t;
  t.center = box.center;
  t.extent = box.extent;
  t.cos_neg_yaw = std::cos(-box.yaw);
  t.sin_neg_yaw = std::sin(-box.yaw);
  return slab_entry(origin, dir, t, max_range);
}

PointCloud scan_lidar(const LidarConfig& config, const geom::Pose& sensor_pose,
                      const WorldSnapshot& snapshot, int exclude_actor_id) {
  const BeamGrid grid = BeamGrid::from(config);
  const auto targets = collect_targets(snapshot, exclude_actor_id);
  const geom::Vec3 origin = sensor_pose.position;
  const double cy = std::cos(sensor_pose.yaw);
  const double sy = std::sin(sensor_pose.yaw);

  std::vector<double> ranges(grid.beam_count(), BackgroundScan::kNoReturn);
#pragma omp parallel for schedule(static)
  for (int az = 0; az < grid.azimuth_count; ++az) {
    for (int ch = 0; ch < grid.channels; ++ch) {
      const geom::Vec3 local = grid.direction(az, ch, config.elevation_span);
      const geom::Vec3 dir{local.x * cy - local.y * sy,
                           local.x * sy + local.y * cy, local.z};
      const std::uint32_t beam = grid.beam_id(az, ch);
      ranges[beam] =
          beam_range(origin, dir, targets, config, snapshot.time_us, beam);
    }
  }
  return compact_ranges(ranges, grid, config, snapshot.time_us);
}

PointCloud scan_lidar_serial(const LidarConfig& config,
                             const geom::Pose& sensor_pose,
                             const WorldSnapshot& snapshot,
                             int exclude_actor_id) {
  const BeamGrid grid = BeamGrid::from(config);
  const auto targets = collect_targets(snapshot, exclude_actor_id);
  const geom::Vec3 origin = sensor_pose.position;
  const double cy = std::cos(sensor_pose.yaw);
  const double sy = std::sin(sensor_pose.yaw);

  std::vector<double> ranges(grid.beam_count(), BackgroundScan::kNoReturn);
  for (int az = 0; az < grid.azimuth_count; ++az) {
    for (int ch = 0; ch < grid.channels; ++ch) {
      const geom::Vec3 local = grid.direction(az, ch, config.elevation_span);
      const geom::Vec3 dir{local.x * cy - local.y * sy,
                           local.x * sy + local.y * cy, local.z};
      const std::uint32_t beam = grid.beam_id(az, ch);
      ranges[beam] =
          beam_range(origin, dir, targets, config, snapshot.time_us, beam);
    }
  }
  return compact_ranges(ranges, grid, config, snapshot.time_us);
}

PointCloud capture_background(const LidarConfig& config,
                              const geom::Pose& sensor_pose,
                              const WorldSnapshot& statics_snapshot) {
  for (const auto& state : statics_snapshot.actors) {
    if (state.kind != ActorKind::static_obstacle) {
      throw std::invalid_argument(
          "capture_background: snapshot contains a movable actor");
    }
  }
  return scan_lidar(config, sensor_pose, statics_snapshot);
}

BackgroundScan background_from_cloud(const PointCloud& cloud, const BeamGrid& grid) {
  if (!cloud.has_beam_ids() && !cloud.points.empty()) {
    throw std::invalid_argument("background_from_cloud: cloud lacks beam ids");
  }
  BackgroundScan background;
  background.azimuth_count = grid.azimuth_count;
  background.channels = grid.channels;
  background.range_by_beam.assign(grid.beam_count(), BackgroundScan::kNoReturn);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const std::uint32_t beam = cloud.beam_ids[i];
    if (beam >= background.range_by_beam.size()) {
      throw std::invalid_argument("background_from_cloud: beam id outside grid");
    }
    background.range_by_beam[beam] = geom::norm(cloud.points[i]);
  }
  return background;
}

}  // namespace coopsense::sim
