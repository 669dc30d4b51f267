#include "coopsense/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopsense::fuse {

const char* to_string(FusionMode mode) {
  return mode == FusionMode::pixel ? "pixel" : "feature";
}

FusionMode fusion_mode_from_string(const std::string& name) {
  if (name == "pixel") return FusionMode::pixel;
  if (name == "feature") return FusionMode::feature;
  throw std::invalid_argument("unknown fusion mode: " + name);
}

PointCloud unify_cloud(const PointCloud& cloud, const SensorRegistration& registration,
                       const std::optional<geom::Pose>& vehicle_pose) {
  if (cloud.frame == Frame::world) return cloud;

  PointCloud out = cloud;
  out.frame = Frame::world;
  if (registration.kind == SensorKind::vehicle_mounted) {
    if (!vehicle_pose) {
      throw std::invalid_argument(
          "unify_cloud: vehicle-mounted source requires a vehicle pose");
    }
    // Body-frame points already carry the mount offset.
    const geom::Vec3 mount =
        cloud.frame == Frame::body ? geom::Vec3{} : registration.mount_offset;
    for (auto& p : out.points) {
      p = geom::vehicle_to_world(p, mount, *vehicle_pose);
    }
  } else {
    for (auto& p : out.points) {
      p = geom::road_to_world(p, registration.world_pose);
    }
  }
  return out;
}

PointCloud merge_clouds(const std::vector<PointCloud>& clouds) {
  PointCloud merged;
  merged.frame = Frame::world;
  merged.source = "fused";
  for (const auto& cloud : clouds) {
    if (cloud.frame != Frame::world) {
      throw std::invalid_argument("merge_clouds: input not in world frame");
    }
    if (!merged.spans.empty() && cloud.timestamp_us != merged.timestamp_us) {
      throw std::invalid_argument("merge_clouds: timestamp mismatch");
    }
    merged.timestamp_us = cloud.timestamp_us;
    merged.spans.push_back({cloud.source, merged.points.size(), cloud.points.size()});
    merged.points.insert(merged.points.end(), cloud.points.begin(),
                         cloud.points.end());
  }
  return merged;
}

detect::Detection detection_to_world(const detect::Detection& det,
                                     const geom::Pose& vehicle_pose) {
  detect::Detection out = det;
  out.box.center = geom::rotate_z(det.box.center, vehicle_pose.yaw) +
                   vehicle_pose.position;
  out.box.yaw = geom::normalize_angle(det.box.yaw + vehicle_pose.yaw);
  return out;
}

namespace {

bool detection_order(const detect::Detection& a, const detect::Detection& b) {
  if (a.point_count != b.point_count) return a.point_count > b.point_count;
  if (a.source != b.source) return a.source < b.source;
  if (a.box.center.x != b.box.center.x) return a.box.center.x < b.box.center.x;
  if (a.box.center.y != b.box.center.y) return a.box.center.y < b.box.center.y;
  return a.box.center.z < b.box.center.z;
}

detect::Detection merge_group(const std::vector<const detect::Detection*>& group) {
  const detect::Detection& head = *group.front();
  double total_weight = 0.0;
  geom::Vec3 center{};
  double yaw_arc = 0.0;
  geom::Vec3 extent = head.box.extent;
  std::uint32_t points = 0;
  for (const auto* det : group) {
    const double w = static_cast<double>(det->point_count);
    total_weight += w;
    center = center + det->box.center * w;
    yaw_arc += w * geom::axis_angle_diff(det->box.yaw, head.box.yaw);
    extent.x = std::max(extent.x, det->box.extent.x);
    extent.y = std::max(extent.y, det->box.extent.y);
    extent.z = std::max(extent.z, det->box.extent.z);
    points += det->point_count;
  }
  detect::Detection merged = head;
  merged.box.center = center / total_weight;
  merged.box.yaw = geom::normalize_angle(head.box.yaw + yaw_arc / total_weight);
  merged.box.extent = extent;
  merged.point_count = points;
  merged.source = "fused";
  return merged;
}

// One greedy agglomeration pass. Returns true if anything merged.
bool fuse_pass(std::vector<detect::Detection>& detections, double iou_threshold) {
  std::sort(detections.begin(), detections.end(), detection_order);
  std::vector<bool> absorbed(detections.size(), false);
  std::vector<detect::Detection> out;
  bool any_merge = false;

  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (absorbed[i]) continue;
    std::vector<const detect::Detection*> group = {&detections[i]};
    for (std::size_t j = i + 1; j < detections.size(); ++j) {
      if (absorbed[j]) continue;
      if (detections[j].box.label != detections[i].box.label) continue;
      if (geom::box_iou(detections[i].box, detections[j].box) >= iou_threshold) {
        absorbed[j] = true;
        group.push_back(&detections[j]);
      }
    }
    if (group.size() > 1) {
      any_merge = true;
      out.push_back(merge_group(group));
    } else {
      out.push_back(detections[i]);
    }
  }
  detections.swap(out);
  return any_merge;
}

}  // namespace

std::vector<detect::Detection> fuse_boxes(std::vector<detect::Detection> detections,
                                          double iou_threshold) {
  // Merged boxes grow (max extents), so a pass can create new overlaps;
  // iterate until the set is stable. Each merging pass shrinks the set, so
  // this terminates.
  while (fuse_pass(detections, iou_threshold)) {
  }
  std::sort(detections.begin(), detections.end(), detection_order);
  return detections;
}

FusedFrame fuse_frame(FusionMode mode, const std::vector<SensorFrameInput>& inputs,
                      const std::vector<SensorRegistration>& registrations,
                      const std::optional<geom::Pose>& vehicle_pose,
                      double iou_threshold) {
  auto find_registration = [&](const std::string& id) -> const SensorRegistration& {
    for (const auto& reg : registrations) {
      if (reg.sensor_id == id) return reg;
    }
    throw std::invalid_argument("fuse_frame: unregistered sensor " + id);
  };

  FusedFrame frame;
  frame.mode = mode;
  for (const auto& input : inputs) frame.sources.push_back(input.sensor_id);

  if (mode == FusionMode::pixel) {
    std::vector<PointCloud> world_clouds;
    world_clouds.reserve(inputs.size());
    for (const auto& input : inputs) {
      world_clouds.push_back(
          unify_cloud(input.cloud, find_registration(input.sensor_id), vehicle_pose));
    }
    frame.world_cloud = merge_clouds(world_clouds);
    frame.timestamp_us = frame.world_cloud.timestamp_us;
    return frame;
  }

  std::vector<detect::Detection> world_boxes;
  for (const auto& input : inputs) {
    const auto& reg = find_registration(input.sensor_id);
    for (const auto& det : input.detections) {
      if (reg.kind == SensorKind::vehicle_mounted) {
        if (!vehicle_pose) {
          throw std::invalid_argument(
              "fuse_frame: vehicle-mounted detections require a vehicle pose");
        }
        world_boxes.push_back(detection_to_world(det, *vehicle_pose));
      } else {
        world_boxes.push_back(det);  // roadside publishes world-frame boxes
      }
      frame.timestamp_us = det.timestamp_us;
    }
  }
  frame.world_boxes = fuse_boxes(std::move(world_boxes), iou_threshold);
  return frame;
}

}  // namespace coopsense::fuse
