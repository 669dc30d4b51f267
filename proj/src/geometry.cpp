#include "coopsense/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace coopsense::geom {

double normalize_angle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

double angle_diff(double a, double b) { return normalize_angle(a - b); }

double axis_angle_diff(double a, double b) {
  double d = std::fmod(a - b, kPi);
  if (d <= -kPi / 2.0) {
    d += kPi;
  } else if (d > kPi / 2.0) {
    d -= kPi;
  }
  return d;
}

Vec3 rotate_z(const Vec3& p, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {p.x * c - p.y * s, p.x * s + p.y * c, p.z};
}

Vec3 road_to_world(const Vec3& p_road, const Vec3& l_road) {
  return p_road + l_road;
}

Vec3 road_to_world(const Vec3& p_road, const Pose& road_pose) {
  return rotate_z(p_road, road_pose.yaw) + road_pose.position;
}

Vec3 vehicle_to_world(const Vec3& p_vehicle, const Vec3& d_vehicle,
                      const Pose& vehicle_pose) {
  return rotate_z(p_vehicle + d_vehicle, vehicle_pose.yaw) + vehicle_pose.position;
}

Vec3 world_to_vehicle(const Vec3& p_world, const Vec3& d_vehicle,
                      const Pose& vehicle_pose) {
  return rotate_z(p_world - vehicle_pose.position, -vehicle_pose.yaw) - d_vehicle;
}

const char* to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::vehicle:
      return "vehicle";
    case ClassLabel::pedestrian:
      return "pedestrian";
    case ClassLabel::bicycle:
      return "bicycle";
    case ClassLabel::unknown:
      return "unknown";
  }
  return "unknown";
}

ClassLabel class_label_from_string(const std::string& name) {
  if (name == "vehicle") return ClassLabel::vehicle;
  if (name == "pedestrian") return ClassLabel::pedestrian;
  if (name == "bicycle") return ClassLabel::bicycle;
  if (name == "unknown") return ClassLabel::unknown;
  throw std::invalid_argument("unknown class label: " + name);
}

std::array<Vec3, 8> OrientedBox::corners() const {
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  std::array<Vec3, 8> out;
  for (int level = 0; level < 2; ++level) {
    const double sz = level == 0 ? -1.0 : 1.0;
    for (int i = 0; i < 4; ++i) {
      const Vec3 local{sx[i] * extent.x, sy[i] * extent.y, sz * extent.z};
      out[level * 4 + i] = rotate_z(local, yaw) + center;
    }
  }
  return out;
}

std::array<Vec2, 4> OrientedBox::footprint() const {
  static constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  static constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    const double lx = sx[i] * extent.x;
    const double ly = sy[i] * extent.y;
    out[i] = {center.x + lx * c - ly * s, center.y + lx * s + ly * c};
  }
  return out;
}

OrientedBox OrientedBox::from_corners(const std::array<Vec3, 8>& corners,
                                      ClassLabel label) {
  Vec3 sum{};
  for (const auto& c : corners) sum = sum + c;
  const Vec3 center = sum / 8.0;

  const Vec3 x_edge = corners[1] - corners[0];
  const Vec3 y_edge = corners[3] - corners[0];
  const double yaw = std::atan2(x_edge.y, x_edge.x);
  OrientedBox box;
  box.center = center;
  box.extent = {0.5 * std::hypot(x_edge.x, x_edge.y),
                0.5 * std::hypot(y_edge.x, y_edge.y),
                0.5 * (corners[4].z - corners[0].z)};
  box.yaw = normalize_angle(yaw);
  box.label = label;
  return box;
}

double polygon_area(std::span<const Vec2> polygon) {
  if (polygon.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % polygon.size()];
    twice += cross(a, b);
  }
  return 0.5 * twice;
}

std::vector<Vec2> clip_convex_polygon(std::span<const Vec2> subject,
                                      std::span<const Vec2> clip) {
  std::vector<Vec2> output(subject.begin(), subject.end());
  for (std::size_t i = 0; i < clip.size() && !output.empty(); ++i) {
    const Vec2 edge_a = clip[i];
    const Vec2 edge_b = clip[(i + 1) % clip.size()];
    const Vec2 edge = edge_b - edge_a;

    std::vector<Vec2> input;
    input.swap(output);
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Vec2 cur = input[j];
      const Vec2 nxt = input[(j + 1) % input.size()];
      const double cur_side = cross(edge, cur - edge_a);
      const double nxt_side = cross(edge, nxt - edge_a);
      if (cur_side >= 0.0) {
        output.push_back(cur);
      }
      if ((cur_side > 0.0 && nxt_side < 0.0) || (cur_side < 0.0 && nxt_side > 0.0)) {
        const double t = cur_side / (cur_side - nxt_side);
        output.push_back(cur + (nxt - cur) * t);
      }
    }
  }
  return output;
}

double footprint_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  const auto clipped = clip_convex_polygon(std::span<const Vec2>(fa),
                                           std::span<const Vec2>(fb));
  return std::max(0.0, polygon_area(clipped));
}

double box_overlap_ratio(const OrientedBox& detected, const OrientedBox& truth) {
  const double truth_area = truth.footprint_area();
  if (truth_area < 1e-12) {
    throw std::invalid_argument("box_overlap_ratio: degenerate truth footprint");
  }
  const double inter = footprint_intersection_area(detected, truth);
  return std::clamp(inter / truth_area, 0.0, 1.0);
}

double box_iou(const OrientedBox& a, const OrientedBox& b) {
  const double area_a = a.footprint_area();
  const double area_b = b.footprint_area();
  if (area_a < 1e-12 && area_b < 1e-12) return 0.0;
  const double inter = footprint_intersection_area(a, b);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double box_overlap_ratio_3d(const OrientedBox& detected, const OrientedBox& truth) {
  const double truth_volume = truth.footprint_area() * 2.0 * truth.extent.z;
  if (truth_volume < 1e-12) {
    throw std::invalid_argument("box_overlap_ratio_3d: degenerate truth box");
  }
  const double inter_area = footprint_intersection_area(detected, truth);
  const double z_lo = std::max(detected.center.z - detected.extent.z,
                               truth.center.z - truth.extent.z);
  const double z_hi = std::min(detected.center.z + detected.extent.z,
                               truth.center.z + truth.extent.z);
  const double inter_z = std::max(0.0, z_hi - z_lo);
  return std::clamp(inter_area * inter_z / truth_volume, 0.0, 1.0);
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) {
                             return a.x == b.x && a.y == b.y;
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;

  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 &&
           cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = points[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower &&
           cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

RectFit rect_from_segment(const Vec2& a, const Vec2& b, double min_half_width) {
  const Vec2 d = b - a;
  const double len = norm(d);
  RectFit fit;
  fit.center = (a + b) * 0.5;
  fit.half_length = std::max(0.5 * len, min_half_width);
  fit.half_width = min_half_width;
  fit.yaw = len > 0.0 ? std::atan2(d.y, d.x) : 0.0;
  if (fit.half_width > fit.half_length) std::swap(fit.half_width, fit.half_length);
  fit.yaw = axis_angle_diff(fit.yaw, 0.0);
  return fit;
}

}  // namespace

RectFit min_area_rect(const std::vector<Vec2>& points, double min_half_width) {
  const auto hull = convex_hull(points);
  if (hull.empty()) {
    throw std::invalid_argument("min_area_rect: no points");
  }
  if (hull.size() == 1) {
    return rect_from_segment(hull[0], hull[0], min_half_width);
  }
  if (hull.size() == 2) {
    return rect_from_segment(hull[0], hull[1], min_half_width);
  }

  double best_area = std::numeric_limits<double>::infinity();
  RectFit best;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = norm(edge);
    if (len < 1e-12) continue;
    const Vec2 dir{edge.x / len, edge.y / len};
    const Vec2 nrm{-dir.y, dir.x};

    double min_u = std::numeric_limits<double>::infinity();
    double max_u = -min_u;
    double min_v = min_u;
    double max_v = -min_u;
    for (const Vec2& p : hull) {
      const double u = dot(p, dir);
      const double v = dot(p, nrm);
      min_u = std::min(min_u, u);
      max_u = std::max(max_u, u);
      min_v = std::min(min_v, v);
      max_v = std::max(max_v, v);
    }
    const double du = max_u - min_u;
    const double dv = max_v - min_v;
    const double area = du * dv;
    if (area < best_area) {
      best_area = area;
      const double cu = 0.5 * (min_u + max_u);
      const double cv = 0.5 * (min_v + max_v);
      best.center = {cu * dir.x + cv * nrm.x, cu * dir.y + cv * nrm.y};
      best.half_length = 0.5 * du;
      best.half_width = 0.5 * dv;
      best.yaw = std::atan2(dir.y, dir.x);
    }
  }

  // Canonical form: long axis first, yaw folded into (-pi/2, pi/2].
  if (best.half_width > best.half_length) {
    std::swap(best.half_width, best.half_length);
    best.yaw += kPi / 2.0;
  }
  best.yaw = axis_angle_diff(best.yaw, 0.0);
  best.half_width = std::max(best.half_width, min_half_width);
  best.half_length = std::max(best.half_length, min_half_width);
  return best;
}

}  // namespace coopsense::geom
