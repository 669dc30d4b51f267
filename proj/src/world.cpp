#include "coopsense/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coopsense/rng.hpp"

namespace coopsense::sim {

const char* to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::car:
      return "car";
    case ActorKind::pedestrian:
      return "pedestrian";
    case ActorKind::bicycle:
      return "bicycle";
    case ActorKind::static_obstacle:
      return "static_obstacle";
  }
  return "car";
}

ActorKind actor_kind_from_string(const std::string& name) {
  if (name == "car") return ActorKind::car;
  if (name == "pedestrian") return ActorKind::pedestrian;
  if (name == "bicycle") return ActorKind::bicycle;
  if (name == "static_obstacle") return ActorKind::static_obstacle;
  throw std::invalid_argument("unknown actor kind: " + name);
}

geom::ClassLabel class_of(ActorKind kind) {
  switch (kind) {
    case ActorKind::car:
      return geom::ClassLabel::vehicle;
    case ActorKind::pedestrian:
      return geom::ClassLabel::pedestrian;
    case ActorKind::bicycle:
      return geom::ClassLabel::bicycle;
    case ActorKind::static_obstacle:
      return geom::ClassLabel::unknown;
  }
  return geom::ClassLabel::unknown;
}

void Actor::validate() const {
  if (trajectory.empty()) {
    throw std::invalid_argument("actor " + std::to_string(id) +
                                ": empty trajectory");
  }
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    if (trajectory[i].t_us <= trajectory[i - 1].t_us) {
      throw std::invalid_argument("actor " + std::to_string(id) +
                                  ": trajectory timestamps not increasing");
    }
  }
  if (!(shape.extent.x > 0.0 && shape.extent.y > 0.0 && shape.extent.z > 0.0)) {
    throw std::invalid_argument("actor " + std::to_string(id) +
                                ": shape extents must be positive");
  }
}

geom::Pose Actor::pose_at(std::uint64_t t_us) const {
  const auto& traj = trajectory;
  if (t_us <= traj.front().t_us) {
    return geom::Pose{traj.front().position, traj.front().yaw}.normalized();
  }
  if (t_us >= traj.back().t_us) {
    // Past the last sample the actor holds its final pose.
    return geom::Pose{traj.back().position, traj.back().yaw}.normalized();
  }
  auto it = std::upper_bound(traj.begin(), traj.end(), t_us,
                             [](std::uint64_t t, const TrajectorySample& s) {
                               return t < s.t_us;
                             });
  const TrajectorySample& b = *it;
  const TrajectorySample& a = *(it - 1);
  const double frac = static_cast<double>(t_us - a.t_us) /
                      static_cast<double>(b.t_us - a.t_us);
  geom::Pose pose;
  pose.position = a.position + (b.position - a.position) * frac;
  pose.yaw = geom::normalize_angle(a.yaw + geom::angle_diff(b.yaw, a.yaw) * frac);
  return pose;
}

geom::Vec3 Actor::velocity_at(std::uint64_t t_us) const {
  const auto& traj = trajectory;
  if (traj.size() < 2 || t_us >= traj.back().t_us) return {};
  auto it = std::upper_bound(traj.begin(), traj.end(),
                             std::max(t_us, traj.front().t_us),
                             [](std::uint64_t t, const TrajectorySample& s) {
                               return t < s.t_us;
                             });
  if (it == traj.begin()) ++it;
  const TrajectorySample& b = *it;
  const TrajectorySample& a = *(it - 1);
  const double dt_s = static_cast<double>(b.t_us - a.t_us) * 1e-6;
  return (b.position - a.position) / dt_s;
}

const ActorState* WorldSnapshot::find(int actor_id) const {
  for (const auto& state : actors) {
    if (state.id == actor_id) return &state;
  }
  return nullptr;
}

World::World(std::vector<Actor> actors, std::uint64_t tick_period_us)
    : actors_(std::move(actors)) {
  clock_.tick_period_us = tick_period_us;
  for (const auto& actor : actors_) actor.validate();
}

WorldSnapshot World::snapshot_at(std::uint64_t t_us) const {
  WorldSnapshot snap;
  snap.time_us = t_us;
  snap.actors.reserve(actors_.size());
  for (const auto& actor : actors_) {
    ActorState state;
    state.id = actor.id;
    state.kind = actor.kind;
    state.pose = actor.pose_at(t_us);
    state.world_box.center =
        geom::rotate_z(actor.shape.center, state.pose.yaw) + state.pose.position;
    state.world_box.extent = actor.shape.extent;
    state.world_box.yaw = geom::normalize_angle(actor.shape.yaw + state.pose.yaw);
    state.world_box.label = class_of(actor.kind);
    state.velocity = actor.velocity_at(t_us);
    snap.actors.push_back(state);
  }
  return snap;
}

WorldSnapshot World::snapshot() const { return snapshot_at(clock_.current_us); }

WorldSnapshot World::step(std::uint64_t dt_us) {
  if (dt_us == 0) {
    throw std::invalid_argument("World::step: dt must be positive");
  }
  clock_.current_us += dt_us;
  return snapshot_at(clock_.current_us);
}

WorldSnapshot World::static_only_snapshot() const {
  WorldSnapshot full = snapshot_at(0);
  WorldSnapshot statics;
  statics.time_us = 0;
  for (const auto& state : full.actors) {
    if (state.kind == ActorKind::static_obstacle) statics.actors.push_back(state);
  }
  return statics;
}

void GnssPair::validate() const {
  if (geom::norm(front - rear) < 1e-6) {
    throw std::invalid_argument("GnssPair: antennas must be distinct");
  }
}

GnssReading measure_gnss(const GnssPair& pair, const geom::Pose& truth,
                         std::uint64_t t_us) {
  auto place = [&](const geom::Vec2& antenna, std::uint64_t stream) {
    const geom::Vec3 world =
        geom::rotate_z({antenna.x, antenna.y, 0.0}, truth.yaw) + truth.position;
    const double nx = pair.noise_sigma * rng::gaussian(pair.seed, stream, 2 * t_us);
    const double ny =
        pair.noise_sigma * rng::gaussian(pair.seed, stream, 2 * t_us + 1);
    return geom::Vec2{world.x + nx, world.y + ny};
  };
  return {place(pair.front, 0xF007ull), place(pair.rear, 0x4EA4ull)};
}

geom::Pose fuse_gnss(const GnssReading& reading) {
  const geom::Vec2 baseline = reading.front - reading.rear;
  if (geom::norm(baseline) < 1e-6) {
    throw std::invalid_argument("fuse_gnss: antenna fixes coincide, yaw undefined");
  }
  geom::Pose pose;
  pose.position = {0.5 * (reading.front.x + reading.rear.x),
                   0.5 * (reading.front.y + reading.rear.y), 0.0};
  pose.yaw = std::atan2(baseline.y, baseline.x);
  return pose;
}

void LidarConfig::validate() const {
  if (!(max_range > 0.0)) {
    throw std::invalid_argument("LidarConfig: max_range must be positive");
  }
  if (!(horizontal_resolution > 0.0)) {
    throw std::invalid_argument("LidarConfig: horizontal_resolution must be positive");
  }
  if (channels < 1) {
    throw std::invalid_argument("LidarConfig: channels must be >= 1");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("LidarConfig: noise_sigma must be >= 0");
  }
}

BeamGrid BeamGrid::from(const LidarConfig& config) {
  config.validate();
  BeamGrid grid;
  grid.azimuth_count = std::max(
      1, static_cast<int>(std::round(2.0 * geom::kPi / config.horizontal_resolution)));
  grid.channels = config.channels;
  return grid;
}

double BeamGrid::azimuth(int azimuth_index) const {
  return -geom::kPi + (2.0 * geom::kPi) * (static_cast<double>(azimuth_index) /
                                           static_cast<double>(azimuth_count));
}

double BeamGrid::elevation(int channel_index, double span) const {
  if (channels == 1) return 0.0;
  return -0.5 * span +
         span * (static_cast<double>(channel_index) / static_cast<double>(channels - 1));
}

geom::Vec3 BeamGrid::direction(int azimuth_index, int channel_index,
                               double span) const {
  const double az = azimuth(azimuth_index);
  const double el = elevation(channel_index, span);
  const double ce = std::cos(el);
  return {ce * std::cos(az), ce * std::sin(az), std::sin(el)};
}

}  // namespace coopsense::sim
