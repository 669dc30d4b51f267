#ifndef COOPSENSE_DETECTION_HPP_
#define COOPSENSE_DETECTION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "coopsense/geometry.hpp"
#include "coopsense/lidar.hpp"
#include "coopsense/pointcloud.hpp"

namespace coopsense::detect {

/// One classified box extracted from a point cloud.
struct Detection {
  geom::OrientedBox box;
  std::string source;
  std::uint64_t timestamp_us = 0;
  std::uint32_t point_count = 0;
};

/// Footprint bounds for one class, in sorted (length >= width) meters.
struct ClassBounds {
  double max_length;
  double max_width;
};

struct DetectorConfig {
  double cluster_radius = 0.7;   // meters, single-linkage distance in xy
  int min_cluster_size = 5;
  double background_tolerance = 0.15;  // meters
  ClassBounds pedestrian_bounds{1.0, 1.0};
  ClassBounds bicycle_bounds{2.2, 1.0};
  ClassBounds vehicle_bounds{6.0, 2.6};

  void validate() const;
};

/// Removes every point whose beam range matches the background reference
/// within the tolerance, leaving only returns from moving objects. The
/// cloud must be a sensor-frame scan from the same pose and beam grid as
/// the background; mismatched grids raise std::invalid_argument.
PointCloud eliminate_static(const PointCloud& cloud,
                            const sim::BackgroundScan& background,
                            double tolerance);

/// Single-linkage Euclidean clustering in xy followed by a minimum-area
/// rectangle fit per cluster and footprint-size classification. Clusters
/// below min_cluster_size are dropped. Output is sorted by descending
/// point count. The cloud must be in a metric frame (body or world).
std::vector<Detection> detect(const PointCloud& cloud, const DetectorConfig& config);

/// Footprint-size table lookup: pedestrian < bicycle < vehicle, else unknown.
geom::ClassLabel classify_footprint(double length, double width,
                                    const DetectorConfig& config);

}  // namespace coopsense::detect

#endif  // COOPSENSE_DETECTION_HPP_
