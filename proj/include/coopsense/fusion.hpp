#ifndef COOPSENSE_FUSION_HPP_
#define COOPSENSE_FUSION_HPP_

#include <optional>
#include <string>
#include <vector>

#include "coopsense/detection.hpp"
#include "coopsense/geometry.hpp"
#include "coopsense/pointcloud.hpp"

namespace coopsense::fuse {

enum class FusionMode : std::uint8_t {
  pixel = 0,    // merge raw clouds in the world frame, detect once
  feature = 1,  // detect per sensor, merge overlapping boxes
};

const char* to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& name);

enum class SensorKind : std::uint8_t { vehicle_mounted = 0, roadside = 1 };

/// Placement of one registered sensor: mount offset for vehicle-mounted
/// sensors, fixed world pose for roadside ones.
struct SensorRegistration {
  std::string sensor_id;
  SensorKind kind = SensorKind::roadside;
  geom::Vec3 mount_offset;  // vehicle_mounted: D in the body frame
  geom::Pose world_pose;    // roadside: L (pole yaw defaults to identity)
};

/// Maps every point of a sensor-frame cloud into the world frame.
/// Vehicle-mounted sensors require the current vehicle pose. A cloud that
/// is already world-frame passes through unchanged.
PointCloud unify_cloud(const PointCloud& cloud, const SensorRegistration& registration,
                       const std::optional<geom::Pose>& vehicle_pose);

/// Concatenates world-frame clouds captured at the same timestamp,
/// recording a source span per input. Frame or timestamp mismatch raises
/// std::invalid_argument.
PointCloud merge_clouds(const std::vector<PointCloud>& clouds);

/// Maps a body-frame detection into the world frame.
detect::Detection detection_to_world(const detect::Detection& det,
                                     const geom::Pose& vehicle_pose);

/// Greedy same-class agglomeration of world-frame boxes: the box with the
/// most points absorbs every later box of its class whose IoU meets the
/// threshold. Merged boxes take the point-count-weighted mean center and
/// yaw (shortest arc, rectangle symmetry respected) and componentwise max
/// extents. Passes repeat until no merge fires, so the result is a fixed
/// point. Output is sorted by descending point count.
std::vector<detect::Detection> fuse_boxes(std::vector<detect::Detection> detections,
                                          double iou_threshold);

/// Per-sensor input to fuse_frame: a cloud for pixel mode, detections for
/// feature mode. Geometry already in the world frame passes through.
struct SensorFrameInput {
  std::string sensor_id;
  PointCloud cloud;
  std::vector<detect::Detection> detections;
};

/// One fused perception frame.
struct FusedFrame {
  std::uint64_t timestamp_us = 0;
  FusionMode mode = FusionMode::feature;
  PointCloud world_cloud;                    // pixel mode
  std::vector<detect::Detection> world_boxes;  // feature mode
  std::vector<std::string> sources;
};

/// Pixel mode: unify_cloud over every input, then merge_clouds. Feature
/// mode: per-sensor detections mapped to the world frame, then fuse_boxes.
FusedFrame fuse_frame(FusionMode mode, const std::vector<SensorFrameInput>& inputs,
                      const std::vector<SensorRegistration>& registrations,
                      const std::optional<geom::Pose>& vehicle_pose,
                      double iou_threshold);

}  // namespace coopsense::fuse

#endif  // COOPSENSE_FUSION_HPP_
