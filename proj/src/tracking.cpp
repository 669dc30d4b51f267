#include "coopsense/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopsense::track {

void TrackerConfig::validate() const {
  if (!(gate_distance > 0.0)) {
    throw std::invalid_argument("TrackerConfig: gate_distance must be positive");
  }
  if (smoothing_factor < 0.0 || smoothing_factor > 1.0) {
    throw std::invalid_argument("TrackerConfig: smoothing_factor must be in [0, 1]");
  }
  if (max_misses < 1 || min_hits < 1) {
    throw std::invalid_argument("TrackerConfig: max_misses and min_hits must be >= 1");
  }
}

geom::Vec3 smooth_update(const geom::Vec3& s_new, const geom::Vec3& s_prev, double t) {
  return s_new * t + s_prev * (1.0 - t);
}

geom::Pose predict(const Track& track, double horizon_s) {
  if (track.history.size() < 2) {
    throw std::invalid_argument("predict: track needs at least two observations");
  }
  geom::Pose pose;
  pose.position = track.last_box().center + track.velocity * horizon_s;
  pose.yaw = track.last_box().yaw;
  return pose;
}

namespace {

struct Candidate {
  double distance;
  int track_index;
  int detection_index;
};

}  // namespace

std::vector<std::pair<int, int>> associate(const std::vector<Track>& tracks,
                                           const std::vector<detect::Detection>& detections,
                                           const TrackerConfig& config, double dt_s) {
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    const Track& track = tracks[ti];
    const geom::Vec3 predicted = track.last_box().center + track.velocity * dt_s;
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const detect::Detection& det = detections[di];
      if (det.box.label != track.label) continue;
      const double dist = geom::norm(geom::Vec2{det.box.center.x - predicted.x,
                                                det.box.center.y - predicted.y});
      if (dist <= config.gate_distance) {
        candidates.push_back({dist, static_cast<int>(ti), static_cast<int>(di)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              if (tracks[a.track_index].id != tracks[b.track_index].id) {
                return tracks[a.track_index].id < tracks[b.track_index].id;
              }
              return a.detection_index < b.detection_index;
            });

  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> det_used(detections.size(), false);
  std::vector<std::pair<int, int>> matches;
  for (const auto& c : candidates) {
    if (track_used[c.track_index] || det_used[c.detection_index]) continue;
    track_used[c.track_index] = true;
    det_used[c.detection_index] = true;
    matches.emplace_back(c.track_index, c.detection_index);
  }
  return matches;
}

Tracker::Tracker(TrackerConfig config) : config_(config) { config_.validate(); }

void Tracker::update(std::uint64_t timestamp_us,
                     const std::vector<detect::Detection>& detections) {
  if (started_ && timestamp_us <= last_time_us_) {
    throw std::invalid_argument("Tracker::update: frames must advance in time");
  }
  const double dt_s =
      started_ ? static_cast<double>(timestamp_us - last_time_us_) * 1e-6 : 0.0;

  const auto matches = associate(tracks_, detections, config_, dt_s);

  std::vector<bool> track_matched(tracks_.size(), false);
  std::vector<bool> det_matched(detections.size(), false);
  for (const auto& [ti, di] : matches) {
    track_matched[ti] = true;
    det_matched[di] = true;
    Track& track = tracks_[ti];
    const detect::Detection& det = detections[di];

    const geom::Vec3 prev_center = track.last_box().center;
    geom::Vec3 instantaneous{};
    if (dt_s > 0.0) {
      instantaneous = (det.box.center - prev_center) / dt_s;
      instantaneous.z = 0.0;
    }
    track.velocity = track.history.size() == 1
                         ? instantaneous
                         : smooth_update(instantaneous, track.velocity,
                                         config_.smoothing_factor);
    track.history.emplace_back(timestamp_us, det.box);
    track.hits += 1;
    track.misses = 0;
  }

  for (std::size_t ti = 0; ti < tracks_.size(); ++ti) {
    if (!track_matched[ti]) tracks_[ti].misses += 1;
  }
  std::erase_if(tracks_, [&](const Track& t) { return t.misses >= config_.max_misses; });

  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (det_matched[di]) continue;
    Track track;
    track.id = next_id_++;
    track.label = detections[di].box.label;
    track.history.emplace_back(timestamp_us, detections[di].box);
    track.velocity = {};
    track.hits = 1;
    tracks_.push_back(std::move(track));
  }

  last_time_us_ = timestamp_us;
  started_ = true;
}

std::vector<const Track*> Tracker::confirmed_tracks() const {
  std::vector<const Track*> out;
  for (const auto& track : tracks_) {
    if (track.confirmed(config_)) out.push_back(&track);
  }
  return out;
}

}  // namespace coopsense::track
