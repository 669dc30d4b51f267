#include "coopsense/v2i.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include <bit>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace coopsense::net {

namespace {

constexpr std::size_t kHeaderBytes = 18;
constexpr std::size_t kCrcBytes = 4;
constexpr std::size_t kBoxBytes = 7 * 8 + 1 + 4;
constexpr std::size_t kPointBytes = 3 * 8;
constexpr char kMagic[4] = {'C', 'P', 'V', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

double get_f64(const std::uint8_t* p) {
  return std::bit_cast<double>(get_u64(p));
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  auto crc = ::crc32(0L, nullptr, 0);
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode(const PerceptionMessage& message) {
  std::vector<std::uint8_t> out;
  const std::size_t payload_items =
      message.payload_kind == PayloadKind::boxes ? message.boxes.size()
                                                 : message.cloud.size();
  const std::size_t item_bytes =
      message.payload_kind == PayloadKind::boxes ? kBoxBytes : kPointBytes;
  out.reserve(kHeaderBytes + 4 + payload_items * item_bytes + kCrcBytes);

  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kProtocolVersion);
  put_u32(out, message.sender_id);
  put_u64(out, message.timestamp_us);
  out.push_back(static_cast<std::uint8_t>(message.payload_kind));

  if (message.payload_kind == PayloadKind::boxes) {
    put_u32(out, static_cast<std::uint32_t>(message.boxes.size()));
    for (const auto& box : message.boxes) {
      put_f64(out, box.center.x);
      put_f64(out, box.center.y);
      put_f64(out, box.center.z);
      put_f64(out, box.extent.x);
      put_f64(out, box.extent.y);
      put_f64(out, box.extent.z);
      put_f64(out, box.yaw);
      out.push_back(static_cast<std::uint8_t>(box.label));
      put_u32(out, box.point_count);
    }
  } else {
    put_u32(out, static_cast<std::uint32_t>(message.cloud.size()));
    for (const auto& p : message.cloud) {
      put_f64(out, p.x);
      put_f64(out, p.y);
      put_f64(out, p.z);
    }
  }

  put_u32(out, crc32(out));
  return out;
}

std::optional<PerceptionMessage> decode(std::span<const std::uint8_t> bytes,
                                        DecodeError* error) {
  auto fail = [&](DecodeError e) {
    if (error) *error = e;
    return std::nullopt;
  };
  if (error) *error = DecodeError::none;

  if (bytes.size() < kHeaderBytes + 4 + kCrcBytes) return fail(DecodeError::truncated);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) return fail(DecodeError::bad_magic);
  if (bytes[4] != kProtocolVersion) return fail(DecodeError::bad_version);

  const std::uint8_t kind_byte = bytes[17];
  if (kind_byte != static_cast<std::uint8_t>(PayloadKind::boxes) &&
      kind_byte != static_cast<std::uint8_t>(PayloadKind::cloud)) {
    return fail(DecodeError::bad_kind);
  }
  const PayloadKind kind = static_cast<PayloadKind>(kind_byte);

  const std::uint32_t count = get_u32(bytes.data() + kHeaderBytes);
  const std::size_t item_bytes = kind == PayloadKind::boxes ? kBoxBytes : kPointBytes;
  const std::size_t expected =
      kHeaderBytes + 4 + static_cast<std::size_t>(count) * item_bytes + kCrcBytes;
  if (bytes.size() != expected) return fail(DecodeError::bad_length);

  const std::size_t body = bytes.size() - kCrcBytes;
  const std::uint32_t stored_crc = get_u32(bytes.data() + body);
  if (crc32(bytes.subspan(0, body)) != stored_crc) return fail(DecodeError::bad_crc);

  PerceptionMessage msg;
  msg.sender_id = get_u32(bytes.data() + 5);
  msg.timestamp_us = get_u64(bytes.data() + 9);
  msg.payload_kind = kind;

  const std::uint8_t* p = bytes.data() + kHeaderBytes + 4;
  if (kind == PayloadKind::boxes) {
    msg.boxes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      WireBox box;
      box.center = {get_f64(p), get_f64(p + 8), get_f64(p + 16)};
      box.extent = {get_f64(p + 24), get_f64(p + 32), get_f64(p + 40)};
      box.yaw = get_f64(p + 48);
      box.label = static_cast<geom::ClassLabel>(p[56] <= 3 ? p[56] : 3);
      box.point_count = get_u32(p + 57);
      msg.boxes.push_back(box);
      p += kBoxBytes;
    }
  } else {
    msg.cloud.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      msg.cloud.push_back({get_f64(p), get_f64(p + 8), get_f64(p + 16)});
      p += kPointBytes;
    }
  }
  return msg;
}

bool InprocChannel::send(std::span<const std::uint8_t> bytes) {
  queue_.emplace_back(bytes.begin(), bytes.end());
  return true;
}

std::vector<std::vector<std::uint8_t>> InprocChannel::poll() {
  std::vector<std::vector<std::uint8_t>> out(queue_.begin(), queue_.end());
  queue_.clear();
  return out;
}

UdpSender::UdpSender(std::uint16_t port) : port_(port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("UdpSender: socket() failed");
}

UdpSender::~UdpSender() {
  if (fd_ >= 0) ::close(fd_);
}

bool UdpSender::send(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > kMaxDatagramBytes) return false;
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  const auto sent = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                             reinterpret_cast<const sockaddr*>(&addr), sizeof(addr));
  return sent == static_cast<ssize_t>(bytes.size());
}

UdpReceiver::UdpReceiver(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw std::runtime_error("UdpReceiver: socket() failed");
  int reuse = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw std::runtime_error("UdpReceiver: bind() failed");
  }
  const int flags = ::fcntl(fd_, F_GETFL, 0);
  ::fcntl(fd_, F_SETFL, flags | O_NONBLOCK);
}

UdpReceiver::~UdpReceiver() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<std::vector<std::uint8_t>> UdpReceiver::poll() {
  std::vector<std::vector<std::uint8_t>> out;
  std::uint8_t buffer[kMaxDatagramBytes];
  while (true) {
    const auto n = ::recvfrom(fd_, buffer, sizeof(buffer), 0, nullptr, nullptr);
    if (n <= 0) break;
    out.emplace_back(buffer, buffer + n);
  }
  return out;
}

std::uint16_t resolve_port(std::optional<std::uint16_t> explicit_port,
                           std::uint16_t fallback) {
  if (explicit_port) return *explicit_port;
  if (const char* env = std::getenv("COOPSENSE_PORT")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0 && v <= 65535) return static_cast<std::uint16_t>(v);
  }
  return fallback;
}

RoadsideNode::RoadsideNode(RoadsideNodeConfig config) : config_(std::move(config)) {
  config_.lidar.validate();
  config_.detector.validate();
  registration_.sensor_id = config_.lidar.sensor_id;
  registration_.kind = fuse::SensorKind::roadside;
  registration_.world_pose = config_.pose;
}

void RoadsideNode::capture_background(const WorldSnapshot& statics_snapshot) {
  const PointCloud cloud =
      sim::capture_background(config_.lidar, config_.pose, statics_snapshot);
  background_ = sim::background_from_cloud(cloud, sim::BeamGrid::from(config_.lidar));
}

std::vector<detect::Detection> RoadsideNode::tick(const WorldSnapshot& snapshot,
                                                  std::uint64_t tick_index,
                                                  MessageSink* sink) {
  PointCloud scan = sim::scan_lidar(config_.lidar, config_.pose, snapshot);
  if (background_.beam_count() > 0) {
    scan = detect::eliminate_static(scan, background_,
                                    config_.detector.background_tolerance);
  }
  const PointCloud world_cloud = fuse::unify_cloud(scan, registration_, std::nullopt);
  std::vector<detect::Detection> detections =
      detect::detect(world_cloud, config_.detector);

  const bool on_cadence =
      config_.cadence_ticks <= 1 || tick_index % config_.cadence_ticks == 0;
  if (sink != nullptr && on_cadence) {
    PerceptionMessage msg;
    msg.sender_id = config_.sender_id;
    msg.timestamp_us = snapshot.time_us;
    msg.payload_kind = config_.payload;
    if (config_.payload == PayloadKind::boxes) {
      msg.boxes.reserve(detections.size());
      for (const auto& det : detections) {
        msg.boxes.push_back({det.box.center, det.box.extent, det.box.yaw,
                             det.box.label, det.point_count});
      }
    } else {
      // Uniform downsample so the datagram stays under the 64 KiB cap.
      constexpr std::size_t kCloudBudgetBytes = 60000;
      constexpr std::size_t kPointBytesOnWire = 24;
      const std::size_t max_points = kCloudBudgetBytes / kPointBytesOnWire;
      const std::size_t stride =
          world_cloud.points.size() <= max_points
              ? 1
              : (world_cloud.points.size() + max_points - 1) / max_points;
      for (std::size_t i = 0; i < world_cloud.points.size(); i += stride) {
        msg.cloud.push_back(world_cloud.points[i]);
      }
    }
    if (!sink->send(encode(msg))) {
      dropped_sends_ += 1;  // transport failure must not break perception
    }
  }
  return detections;
}

VehicleNode::VehicleNode(VehicleNodeConfig config, std::uint64_t tick_period_us)
    : config_(std::move(config)),
      tick_period_us_(tick_period_us),
      tracker_(config_.tracker) {
  config_.lidar.validate();
  config_.detector.validate();
  config_.gnss.validate();
  fuse::SensorRegistration own;
  own.sensor_id = config_.lidar.sensor_id;
  own.kind = fuse::SensorKind::vehicle_mounted;
  own.mount_offset = config_.lidar.mount;
  registrations_.push_back(own);
}

void VehicleNode::ingest(std::span<const std::uint8_t> bytes, std::uint64_t now_us) {
  DecodeError error = DecodeError::none;
  const auto msg = decode(bytes, &error);
  if (!msg) {
    stats_.parse_errors += 1;
    return;
  }
  const std::uint64_t max_age_us =
      static_cast<std::uint64_t>(config_.staleness_ticks) * tick_period_us_;
  if (msg->timestamp_us + max_age_us < now_us) {
    stats_.stale_drops += 1;
    return;
  }
  auto it = receive_buffer_.find(msg->sender_id);
  if (it == receive_buffer_.end() || it->second.timestamp_us <= msg->timestamp_us) {
    receive_buffer_[msg->sender_id] = *msg;
  }
  stats_.accepted += 1;
}

VehicleTickResult VehicleNode::tick(const WorldSnapshot& snapshot,
                                    MessageSource* source) {
  const ActorState* ego = snapshot.find(config_.ego_actor_id);
  if (ego == nullptr) {
    throw std::invalid_argument("VehicleNode: ego actor missing from snapshot");
  }
  const std::uint64_t now = snapshot.time_us;

  VehicleTickResult result;
  result.pose_estimate =
      sim::fuse_gnss(sim::measure_gnss(config_.gnss, ego->pose, now));

  // Onboard scan from the true sensor pose; all world-frame output goes
  // through the GNSS estimate, like the real pipeline would.
  const geom::Pose sensor_pose{
      geom::rotate_z(config_.lidar.mount, ego->pose.yaw) + ego->pose.position,
      ego->pose.yaw};
  const PointCloud sensor_cloud =
      sim::scan_lidar(config_.lidar, sensor_pose, snapshot, config_.ego_actor_id);

  PointCloud body_cloud = sensor_cloud;
  body_cloud.frame = Frame::body;
  for (auto& p : body_cloud.points) p = p + config_.lidar.mount;

  if (source != nullptr) {
    for (const auto& datagram : source->poll()) {
      ingest(datagram, now);
    }
  }
  // Age out buffered messages so stale geometry never reaches fusion.
  const std::uint64_t max_age_us =
      static_cast<std::uint64_t>(config_.staleness_ticks) * tick_period_us_;
  std::erase_if(receive_buffer_, [&](const auto& entry) {
    return entry.second.timestamp_us + max_age_us < now;
  });

  std::vector<detect::Detection> own_body = detect::detect(body_cloud, config_.detector);
  result.own_detections.reserve(own_body.size());
  for (const auto& det : own_body) {
    result.own_detections.push_back(
        fuse::detection_to_world(det, result.pose_estimate));
  }

  std::vector<fuse::SensorFrameInput> inputs;
  std::vector<fuse::SensorRegistration> registrations = registrations_;

  fuse::SensorFrameInput own_input;
  own_input.sensor_id = config_.lidar.sensor_id;
  own_input.cloud = sensor_cloud;
  own_input.detections = own_body;
  inputs.push_back(std::move(own_input));

  for (const auto& [sender, msg] : receive_buffer_) {
    fuse::SensorFrameInput remote;
    remote.sensor_id = "remote-" + std::to_string(sender);
    if (msg.payload_kind == PayloadKind::boxes) {
      for (const auto& box : msg.boxes) {
        detect::Detection det;
        det.box.center = box.center;
        det.box.extent = box.extent;
        det.box.yaw = box.yaw;
        det.box.label = box.label;
        det.source = remote.sensor_id;
        det.timestamp_us = msg.timestamp_us;
        det.point_count = box.point_count;
        remote.detections.push_back(det);
        result.remote_detections.push_back(det);
      }
    } else {
      remote.cloud.points = msg.cloud;
      remote.cloud.frame = Frame::world;
      remote.cloud.timestamp_us = now;
      remote.cloud.source = remote.sensor_id;
    }
    fuse::SensorRegistration reg;
    reg.sensor_id = remote.sensor_id;
    reg.kind = fuse::SensorKind::roadside;  // payload is already world frame
    registrations.push_back(reg);
    inputs.push_back(std::move(remote));
  }

  const fuse::FusedFrame frame =
      fuse::fuse_frame(config_.fusion, inputs, registrations, result.pose_estimate,
                       config_.iou_threshold);
  if (config_.fusion == fuse::FusionMode::pixel) {
    result.fused_detections = detect::detect(frame.world_cloud, config_.detector);
  } else {
    result.fused_detections = frame.world_boxes;
  }

  tracker_.update(now, result.fused_detections);
  return result;
}

}  // namespace coopsense::net
