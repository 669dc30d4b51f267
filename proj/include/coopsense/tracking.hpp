#ifndef COOPSENSE_TRACKING_HPP_
#define COOPSENSE_TRACKING_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "coopsense/detection.hpp"
#include "coopsense/geometry.hpp"

namespace coopsense::track {

struct TrackerConfig {
  double gate_distance = 3.0;     // meters
  double smoothing_factor = 0.7;  // t in [0, 1]
  int max_misses = 3;
  int min_hits = 2;

  void validate() const;
};

/// Persistent object identity across frames.
struct Track {
  int id = 0;
  geom::ClassLabel label = geom::ClassLabel::unknown;
  std::vector<std::pair<std::uint64_t, geom::OrientedBox>> history;
  geom::Vec3 velocity;  // smoothed planar velocity, z fixed 0
  int misses = 0;
  int hits = 0;

  bool confirmed(const TrackerConfig& config) const {
    return hits >= config.min_hits;
  }
  const geom::OrientedBox& last_box() const { return history.back().second; }
  std::uint64_t last_time_us() const { return history.back().first; }
};

/// Exponential blend of the newest velocity estimate with the previous
/// smoothed value: t * s_new + (1 - t) * s_prev, componentwise.
geom::Vec3 smooth_update(const geom::Vec3& s_new, const geom::Vec3& s_prev, double t);

/// Extrapolates a track by its smoothed velocity; yaw holds the last
/// observed value. Requires at least two history entries.
geom::Pose predict(const Track& track, double horizon_s);

/// Greedy nearest-neighbor association on predicted centers, same class
/// only, within the gate. Pairs are taken smallest distance first; exact
/// ties break on (track id, detection index). Returns (track index,
/// detection index) pairs.
std::vector<std::pair<int, int>> associate(const std::vector<Track>& tracks,
                                           const std::vector<detect::Detection>& detections,
                                           const TrackerConfig& config, double dt_s);

/// Sequential per-run tracker; frames must arrive in timestamp order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  /// Consumes one fused frame of detections.
  void update(std::uint64_t timestamp_us, const std::vector<detect::Detection>& detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<const Track*> confirmed_tracks() const;
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::uint64_t last_time_us_ = 0;
  bool started_ = false;
};

}  // namespace coopsense::track

#endif  // COOPSENSE_TRACKING_HPP_
