#ifndef COOPSENSE_GEOMETRY_HPP_
#define COOPSENSE_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace coopsense::geom {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 xy() const { return {x, y}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Shortest-arc difference a - b, in (-pi, pi].
double angle_diff(double a, double b);

/// Shortest-arc difference between two rectangle axis orientations,
/// in (-pi/2, pi/2]. Rectangle yaw is ambiguous by pi.
double axis_angle_diff(double a, double b);

/// Rigid placement in the plane: position plus yaw about +z (counterclockwise).
struct Pose {
  Vec3 position;
  double yaw = 0.0;  // radians, (-pi, pi]

  Pose normalized() const { return {position, normalize_angle(yaw)}; }
};

/// Rotation about +z by yaw: (x cos - y sin, x sin + y cos, z).
Vec3 rotate_z(const Vec3& p, double yaw);

/// Roadside point to world: componentwise sum of the point and the sensor
/// location. A roadside unit with nonzero pole yaw composes the rotation
/// first; zero yaw reduces to the plain sum.
Vec3 road_to_world(const Vec3& p_road, const Vec3& l_road);
Vec3 road_to_world(const Vec3& p_road, const Pose& road_pose);

/// Vehicle-sensor point to world: rotate_z(p + mount_offset, pose.yaw) +
/// pose.position. Translation into the body frame happens before rotation.
Vec3 vehicle_to_world(const Vec3& p_vehicle, const Vec3& d_vehicle,
                      const Pose& vehicle_pose);

/// Inverse of vehicle_to_world.
Vec3 world_to_vehicle(const Vec3& p_world, const Vec3& d_vehicle,
                      const Pose& vehicle_pose);

enum class ClassLabel : std::uint8_t {
  vehicle = 0,
  pedestrian = 1,
  bicycle = 2,
  unknown = 3,
};

const char* to_string(ClassLabel label);
ClassLabel class_label_from_string(const std::string& name);

/// 3D detection boundary: center, half-lengths along local axes, yaw about +z.
/// Equivalently expressible as its eight corner points.
struct OrientedBox {
  Vec3 center;
  Vec3 extent;  // half-lengths, strictly positive
  double yaw = 0.0;
  ClassLabel label = ClassLabel::unknown;

  /// Eight corners; bottom face first, counterclockwise starting at
  /// (-x, -y), then the top face in the same order.
  std::array<Vec3, 8> corners() const;

  /// Footprint corners in the xy plane, counterclockwise.
  std::array<Vec2, 4> footprint() const;

  double footprint_area() const { return 4.0 * extent.x * extent.y; }

  /// Rebuilds a box from corners laid out as corners() produces them.
  static OrientedBox from_corners(const std::array<Vec3, 8>& corners,
                                  ClassLabel label = ClassLabel::unknown);

  bool valid() const {
    return center.finite() && extent.x > 0.0 && extent.y > 0.0 &&
           extent.z > 0.0 && std::isfinite(yaw);
  }
};

/// Shoelace area of a simple polygon (positive for counterclockwise order).
double polygon_area(std::span<const Vec2> polygon);

/// Sutherland-Hodgman clip of a convex subject polygon against a convex
/// clip polygon (both counterclockwise). Returns the intersection polygon.
std::vector<Vec2> clip_convex_polygon(std::span<const Vec2> subject,
                                      std::span<const Vec2> clip);

/// Area of intersection of two box footprints.
double footprint_intersection_area(const OrientedBox& a, const OrientedBox& b);

/// Intersection area of the two footprints divided by the truth footprint
/// area. Asymmetric. Throws std::invalid_argument when the truth footprint
/// is degenerate (area < 1e-12).
double box_overlap_ratio(const OrientedBox& detected, const OrientedBox& truth);

/// Footprint intersection over union. Symmetric; 0.0 when both footprints
/// are degenerate.
double box_iou(const OrientedBox& a, const OrientedBox& b);

/// 3D variant: footprint intersection times z-interval overlap, divided by
/// the truth volume. Not used by the planar overlap metric.
double box_overlap_ratio_3d(const OrientedBox& detected, const OrientedBox& truth);

/// Convex hull (counterclockwise, no collinear points). Input order is
/// irrelevant; duplicates are tolerated.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Minimum-area oriented rectangle fit.
struct RectFit {
  Vec2 center;
  double half_length = 0.0;  // along yaw axis, >= half_width
  double half_width = 0.0;
  double yaw = 0.0;  // (-pi/2, pi/2]
};

/// Rotating-calipers minimum-area rectangle over the convex hull of the
/// points. Degenerate inputs (single point, collinear set) produce a
/// rectangle padded to min_half_width.
RectFit min_area_rect(const std::vector<Vec2>& points, double min_half_width = 0.05);

}  // namespace coopsense::geom

#endif  // COOPSENSE_GEOMETRY_HPP_
