#ifndef COOPSENSE_POINTCLOUD_HPP_
#define COOPSENSE_POINTCLOUD_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "coopsense/geometry.hpp"

namespace coopsense {

enum class Frame : std::uint8_t {
  sensor = 0,  // local to the emitting sensor
  body = 1,    // vehicle body frame
  world = 2,   // shared virtual frame used for fusion
};

const char* to_string(Frame frame);

/// Contiguous run of points contributed by one source, kept through merges.
struct SourceSpan {
  std::string source;
  std::size_t begin = 0;
  std::size_t count = 0;
};

/// Timestamped set of 3D points tagged with the frame they live in.
/// Scanner output also carries the beam index of every point so background
/// subtraction can compare ranges beam by beam.
struct PointCloud {
  std::vector<geom::Vec3> points;
  std::vector<std::uint32_t> beam_ids;  // parallel to points, may be empty
  Frame frame = Frame::sensor;
  std::uint64_t timestamp_us = 0;
  std::string source;
  std::vector<SourceSpan> spans;  // filled by merge_clouds; empty otherwise

  std::size_t size() const { return points.size(); }
  bool has_beam_ids() const { return beam_ids.size() == points.size(); }
};

}  // namespace coopsense

#endif  // COOPSENSE_POINTCLOUD_HPP_
