#ifndef COOPSENSE_V2I_HPP_
#define COOPSENSE_V2I_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopsense/detection.hpp"
#include "coopsense/fusion.hpp"
#include "coopsense/lidar.hpp"
#include "coopsense/tracking.hpp"
#include "coopsense/world.hpp"

namespace coopsense::net {

// Wire format "CPV1": little-endian fixed-width fields, IEEE-754 doubles.
//
//   offset  size  field
//        0     4  magic "CPV1"
//        4     1  version (1)
//        5     4  sender_id          u32
//        9     8  timestamp_us       u64
//       17     1  payload_kind       1 = boxes, 2 = cloud
//       18     -  payload
//    end-4     4  crc32 over header + payload
//
// boxes payload: count u32, then per box center xyz, extent xyz, yaw (f64
// each), class u8, point_count u32. cloud payload: count u32, then xyz f64
// triples.

constexpr std::uint8_t kProtocolVersion = 1;
constexpr std::size_t kMaxDatagramBytes = 64 * 1024;

enum class PayloadKind : std::uint8_t { boxes = 1, cloud = 2 };

struct WireBox {
  geom::Vec3 center;
  geom::Vec3 extent;
  double yaw = 0.0;
  geom::ClassLabel label = geom::ClassLabel::unknown;
  std::uint32_t point_count = 0;

  bool operator==(const WireBox&) const = default;
};

struct PerceptionMessage {
  std::uint32_t sender_id = 0;
  std::uint64_t timestamp_us = 0;
  PayloadKind payload_kind = PayloadKind::boxes;
  std::vector<WireBox> boxes;
  std::vector<geom::Vec3> cloud;

  bool operator==(const PerceptionMessage&) const = default;
};

enum class DecodeError : std::uint8_t {
  none = 0,
  truncated,
  bad_magic,
  bad_version,
  bad_kind,
  bad_length,
  bad_crc,
};

std::vector<std::uint8_t> encode(const PerceptionMessage& message);
std::optional<PerceptionMessage> decode(std::span<const std::uint8_t> bytes,
                                        DecodeError* error = nullptr);

/// crc32 (IEEE 802.3 polynomial) over the given bytes.
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Outbound half of a transport.
class MessageSink {
 public:
  virtual ~MessageSink() = default;
  /// Returns false when the datagram could not be handed off; senders
  /// treat that as loss, never as a pipeline failure.
  virtual bool send(std::span<const std::uint8_t> bytes) = 0;
};

/// Inbound half of a transport.
class MessageSource {
 public:
  virtual ~MessageSource() = default;
  virtual std::vector<std::vector<std::uint8_t>> poll() = 0;
};

/// Deterministic in-process datagram queue for tests and single-process runs.
class InprocChannel : public MessageSink, public MessageSource {
 public:
  bool send(std::span<const std::uint8_t> bytes) override;
  std::vector<std::vector<std::uint8_t>> poll() override;

 private:
  std::deque<std::vector<std::uint8_t>> queue_;
};

/// Sink that drops everything, for severed-link experiments.
class SeveredChannel : public MessageSink, public MessageSource {
 public:
  bool send(std::span<const std::uint8_t>) override { return false; }
  std::vector<std::vector<std::uint8_t>> poll() override { return {}; }
};

/// UDP datagram sender to 127.0.0.1:port.
class UdpSender : public MessageSink {
 public:
  explicit UdpSender(std::uint16_t port);
  ~UdpSender() override;
  bool send(std::span<const std::uint8_t> bytes) override;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Non-blocking UDP receiver bound to a local port.
class UdpReceiver : public MessageSource {
 public:
  explicit UdpReceiver(std::uint16_t port);
  ~UdpReceiver() override;
  std::vector<std::vector<std::uint8_t>> poll() override;

 private:
  int fd_ = -1;
};

/// Port selection: explicit value wins, then the COOPSENSE_PORT environment
/// variable, then the default.
std::uint16_t resolve_port(std::optional<std::uint16_t> explicit_port,
                           std::uint16_t fallback = 47001);

struct RoadsideNodeConfig {
  std::uint32_t sender_id = 1;
  sim::LidarConfig lidar;
  geom::Pose pose;  // L_road, z includes mounting height
  detect::DetectorConfig detector;
  int cadence_ticks = 1;
  PayloadKind payload = PayloadKind::boxes;  // cloud for pixel-mode sharing
};

/// Pole-mounted sensing and publishing unit. Publishes world-frame geometry
/// only: scan, subtract background, unify, detect, encode, send.
class RoadsideNode {
 public:
  explicit RoadsideNode(RoadsideNodeConfig config);

  void capture_background(const WorldSnapshot& statics_snapshot);

  /// Runs the perception pipeline for this tick and publishes on cadence.
  /// Returns the world-frame detections (empty off-cadence).
  std::vector<detect::Detection> tick(const WorldSnapshot& snapshot,
                                      std::uint64_t tick_index, MessageSink* sink);

  const RoadsideNodeConfig& config() const { return config_; }
  const sim::BackgroundScan& background() const { return background_; }
  std::uint64_t dropped_sends() const { return dropped_sends_; }

 private:
  RoadsideNodeConfig config_;
  sim::BackgroundScan background_;
  fuse::SensorRegistration registration_;
  std::uint64_t dropped_sends_ = 0;
};

struct VehicleNodeConfig {
  std::uint32_t node_id = 0;
  int ego_actor_id = 0;
  sim::GnssPair gnss;
  sim::LidarConfig lidar;
  detect::DetectorConfig detector;
  track::TrackerConfig tracker;
  fuse::FusionMode fusion = fuse::FusionMode::feature;
  double iou_threshold = 0.3;
  int staleness_ticks = 2;
};

struct IngestStats {
  std::uint64_t accepted = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t stale_drops = 0;
};

/// Output of one vehicle perception tick.
struct VehicleTickResult {
  geom::Pose pose_estimate;
  std::vector<detect::Detection> own_detections;     // world frame
  std::vector<detect::Detection> remote_detections;  // world frame
  std::vector<detect::Detection> fused_detections;   // world frame, post-fusion
};

/// On-vehicle perception: GNSS pose, onboard lidar, optional remote ingest,
/// fusion, tracking. Never blocks on missing remote data.
class VehicleNode {
 public:
  VehicleNode(VehicleNodeConfig config, std::uint64_t tick_period_us);

  /// Decodes, validates, and buffers one raw datagram. Malformed or stale
  /// input is counted and dropped.
  void ingest(std::span<const std::uint8_t> bytes, std::uint64_t now_us);

  /// Full perception tick: sense, drain the source, fuse, track.
  VehicleTickResult tick(const WorldSnapshot& snapshot, MessageSource* source);

  const track::Tracker& tracker() const { return tracker_; }
  const IngestStats& stats() const { return stats_; }
  const VehicleNodeConfig& config() const { return config_; }

 private:
  VehicleNodeConfig config_;
  std::uint64_t tick_period_us_;
  track::Tracker tracker_;
  IngestStats stats_;
  std::map<std::uint32_t, PerceptionMessage> receive_buffer_;
  std::vector<fuse::SensorRegistration> registrations_;
};

}  // namespace coopsense::net

#endif  // COOPSENSE_V2I_HPP_
