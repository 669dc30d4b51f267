#include "coopsense/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace coopsense::detect {

void DetectorConfig::validate() const {
  if (!(cluster_radius > 0.0)) {
    throw std::invalid_argument("DetectorConfig: cluster_radius must be positive");
  }
  if (min_cluster_size < 3) {
    throw std::invalid_argument("DetectorConfig: min_cluster_size must be >= 3");
  }
}

PointCloud eliminate_static(const PointCloud& cloud,
                            const sim::BackgroundScan& background,
                            double tolerance) {
  if (!cloud.points.empty() && !cloud.has_beam_ids()) {
    throw std::invalid_argument("eliminate_static: cloud lacks beam ids");
  }
  PointCloud out;
  out.frame = cloud.frame;
  out.timestamp_us = cloud.timestamp_us;
  out.source = cloud.source;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const std::uint32_t beam = cloud.beam_ids[i];
    if (beam >= background.range_by_beam.size()) {
      throw std::invalid_argument("eliminate_static: beam grid mismatch");
    }
    const double range = geom::norm(cloud.points[i]);
    const double reference = background.range_by_beam[beam];
    if (std::isfinite(reference) && std::abs(range - reference) <= tolerance) {
      continue;  // background return
    }
    out.points.push_back(cloud.points[i]);
    out.beam_ids.push_back(beam);
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

inline std::int64_t cell_key(int cx, int cy) {
  return (static_cast<std::int64_t>(cx) << 32) ^
         (static_cast<std::int64_t>(cy) & 0xffffffffll);
}

}  // namespace

geom::ClassLabel classify_footprint(double length, double width,
                                    const DetectorConfig& config) {
  auto fits = [&](const ClassBounds& b) {
    return length <= b.max_length && width <= b.max_width;
  };
  if (fits(config.pedestrian_bounds)) return geom::ClassLabel::pedestrian;
  if (fits(config.bicycle_bounds)) return geom::ClassLabel::bicycle;
  if (fits(config.vehicle_bounds)) return geom::ClassLabel::vehicle;
  return geom::ClassLabel::unknown;
}

std::vector<Detection> detect(const PointCloud& cloud, const DetectorConfig& config) {
  config.validate();
  if (cloud.frame == Frame::sensor && !cloud.points.empty()) {
    throw std::invalid_argument(
        "detect: cloud must be in a metric frame (body or world)");
  }
  const std::size_t n = cloud.points.size();
  if (n == 0) return {};

  // Grid-bucketed single-linkage: points closer than cluster_radius in xy
  // land in the same or an adjacent cell.
  const double cell = config.cluster_radius;
  std::unordered_map<std::int64_t, std::vector<int>> buckets;
  std::vector<std::pair<int, int>> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int cx = static_cast<int>(std::floor(cloud.points[i].x / cell));
    const int cy = static_cast<int>(std::floor(cloud.points[i].y / cell));
    cells[i] = {cx, cy};
    buckets[cell_key(cx, cy)].push_back(static_cast<int>(i));
  }

  UnionFind uf(n);
  const double radius_sq = config.cluster_radius * config.cluster_radius;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [cx, cy] = cells[i];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find(cell_key(cx + dx, cy + dy));
        if (it == buckets.end()) continue;
        for (const int j : it->second) {
          if (j <= static_cast<int>(i)) continue;
          const double ddx = cloud.points[i].x - cloud.points[j].x;
          const double ddy = cloud.points[i].y - cloud.points[j].y;
          if (ddx * ddx + ddy * ddy <= radius_sq) {
            uf.unite(static_cast<int>(i), j);
          }
        }
      }
    }
  }

  std::unordered_map<int, std::vector<int>> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    clusters[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));
  }

  std::vector<Detection> detections;
  for (const auto& [root, members] : clusters) {
    if (static_cast<int>(members.size()) < config.min_cluster_size) continue;

    std::vector<geom::Vec2> xy;
    xy.reserve(members.size());
    double z_min = cloud.points[members.front()].z;
    double z_max = z_min;
    for (const int idx : members) {
      const auto& p = cloud.points[idx];
      xy.push_back({p.x, p.y});
      z_min = std::min(z_min, p.z);
      z_max = std::max(z_max, p.z);
    }
    const geom::RectFit fit = geom::min_area_rect(xy);

    Detection det;
    det.box.center = {fit.center.x, fit.center.y, 0.5 * (z_min + z_max)};
    det.box.extent = {fit.half_length, fit.half_width,
                      std::max(0.5 * (z_max - z_min), 0.05)};
    det.box.yaw = fit.yaw;
    det.box.label =
        classify_footprint(2.0 * fit.half_length, 2.0 * fit.half_width, config);
    det.source = cloud.source;
    det.timestamp_us = cloud.timestamp_us;
    det.point_count = static_cast<std::uint32_t>(members.size());
    detections.push_back(det);
  }

  std::sort(detections.begin(), detections.end(),
            [](const Detection& a, const Detection& b) {
              if (a.point_count != b.point_count) return a.point_count > b.point_count;
              if (a.box.center.x != b.box.center.x) return a.box.center.x < b.box.center.x;
              if (a.box.center.y != b.box.center.y) return a.box.center.y < b.box.center.y;
              return a.box.center.z < b.box.center.z;
            });
  return detections;
}

}  // namespace coopsense::detect
