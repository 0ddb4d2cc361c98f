// Copyright 2026 The lorafuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lorafuse/backhaul.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <utility>

#include "lorafuse/error.hpp"
#include "lorafuse/rf_model.hpp"

namespace lorafuse
{

namespace
{

class Writer
{
public:
  explicit Writer(std::vector<std::uint8_t> & out) : out_(out) {}

  void u8(std::uint8_t v) {out_.push_back(v);}
  void u16(std::uint16_t v) {le(v, 2);}
  void u32(std::uint32_t v) {le(v, 4);}
  void u64(std::uint64_t v) {le(v, 8);}
  void i16(std::int16_t v) {u16(static_cast<std::uint16_t>(v));}
  void f32(float v) {u32(std::bit_cast<std::uint32_t>(v));}

private:
  void le(std::uint64_t v, int n)
  {
    for (int i = 0; i < n; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  std::vector<std::uint8_t> & out_;
};

class Reader
{
public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint16_t u16() {return static_cast<std::uint16_t>(le(2));}
  std::uint32_t u32() {return static_cast<std::uint32_t>(le(4));}
  std::uint64_t u64() {return le(8);}
  std::int16_t i16() {return static_cast<std::int16_t>(u16());}
  float f32() {return std::bit_cast<float>(u32());}

private:
  std::uint64_t le(int n)
  {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string check_pose(const PosePacket & p)
{
  for (float v : p.translation) {
    if (!std::isfinite(v)) {
      return "pose translation is not finite";
    }
  }
  if (!std::isfinite(p.yaw)) {
    return "pose yaw is not finite";
  }
  double n2 = 0.0;
  for (float v : p.quaternion) {
    if (!std::isfinite(v)) {
      return "pose quaternion is not finite";
    }
    n2 += static_cast<double>(v) * static_cast<double>(v);
  }
  if (p.has_quaternion() && std::abs(std::sqrt(n2) - 1.0) > 1e-3) {
    return "pose quaternion is not unit norm";
  }
  return {};
}

std::string check_relay(const RssiRelayPacket & p)
{
  if (p.rssi_dbm < kMinRssiDbm || p.rssi_dbm > kMaxRssiDbm) {
    return "relay RSSI " + std::to_string(p.rssi_dbm) + " dBm outside [-160, 30]";
  }
  return {};
}

void write_header(Writer & w, std::uint8_t type, std::size_t payload)
{
  w.u8(kMagic0);
  w.u8(kMagic1);
  w.u8(kProtocolVersion);
  w.u8(type);
  w.u8(static_cast<std::uint8_t>(payload));
}

void append_crc(std::vector<std::uint8_t> & out)
{
  Writer(out).u16(crc16_ccitt_false(out));
}

}  // namespace

bool PosePacket::has_quaternion() const
{
  return std::any_of(quaternion.begin(), quaternion.end(), [](float v) {return v != 0.0F;});
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes)
{
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) :
        static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

std::vector<std::uint8_t> encode(const PosePacket & p)
{
  if (const auto err = check_pose(p); !err.empty()) {
    raise(ErrorCode::kInvalidArgument, err);
  }
  std::vector<std::uint8_t> out;
  out.reserve(kPoseFrameSize);
  Writer w(out);
  write_header(w, kTypePose, kPosePayloadSize);
  w.u16(p.device_id);
  w.u32(p.seq);
  w.u64(p.timestamp_ms);
  for (float v : p.translation) {
    w.f32(v);
  }
  w.f32(p.yaw);
  for (float v : p.quaternion) {
    w.f32(v);
  }
  append_crc(out);
  return out;
}

std::vector<std::uint8_t> encode(const RssiRelayPacket & p)
{
  if (const auto err = check_relay(p); !err.empty()) {
    raise(ErrorCode::kInvalidArgument, err);
  }
  std::vector<std::uint8_t> out;
  out.reserve(kRelayFrameSize);
  Writer w(out);
  write_header(w, kTypeRelay, kRelayPayloadSize);
  w.u16(p.anchor_id);
  w.u16(p.ref_device_id);
  w.u32(p.ref_seq);
  w.i16(p.rssi_dbm);
  append_crc(out);
  return out;
}

std::vector<std::uint8_t> encode(const Packet & p)
{
  return std::visit([](const auto & v) {return encode(v);}, p);
}

DecodedFrame decode(std::span<const std::uint8_t> bytes)
{
  if (bytes.empty()) {
    raise(ErrorCode::kTruncatedFrame, "empty buffer");
  }
  if (bytes[0] != kMagic0 || (bytes.size() > 1 && bytes[1] != kMagic1)) {
    raise(ErrorCode::kNotAFrame, "bad magic");
  }
  if (bytes.size() < kHeaderSize) {
    raise(ErrorCode::kTruncatedFrame, "buffer shorter than the frame header");
  }
  const std::size_t payload = bytes[4];
  const std::size_t total = kHeaderSize + payload + kCrcSize;
  if (bytes.size() < total) {
    raise(
      ErrorCode::kTruncatedFrame,
      "frame needs " + std::to_string(total) + " bytes, have " + std::to_string(bytes.size()));
  }
  const auto body = bytes.first(total - kCrcSize);
  const std::uint16_t wire_crc = static_cast<std::uint16_t>(
    bytes[total - 2] | (bytes[total - 1] << 8));
  if (crc16_ccitt_false(body) != wire_crc) {
    raise(ErrorCode::kCorruptFrame, "CRC mismatch");
  }
  if (bytes[2] != kProtocolVersion) {
    raise(ErrorCode::kUnsupportedFrame, "unsupported protocol version " + std::to_string(bytes[2]));
  }

  Reader r(bytes.subspan(kHeaderSize, payload));
  switch (bytes[3]) {
    case kTypePose: {
        if (payload != kPosePayloadSize) {
          raise(ErrorCode::kUnsupportedFrame, "pose frame with unexpected payload length");
        }
        PosePacket p;
        p.device_id = r.u16();
        p.seq = r.u32();
        p.timestamp_ms = r.u64();
        for (float & v : p.translation) {
          v = r.f32();
        }
        p.yaw = r.f32();
        for (float & v : p.quaternion) {
          v = r.f32();
        }
        if (const auto err = check_pose(p); !err.empty()) {
          raise(ErrorCode::kCorruptFrame, err);
        }
        return {p, total};
      }
    case kTypeRelay: {
        if (payload != kRelayPayloadSize) {
          raise(ErrorCode::kUnsupportedFrame, "relay frame with unexpected payload length");
        }
        RssiRelayPacket p;
        p.anchor_id = r.u16();
        p.ref_device_id = r.u16();
        p.ref_seq = r.u32();
        p.rssi_dbm = r.i16();
        if (const auto err = check_relay(p); !err.empty()) {
          raise(ErrorCode::kCorruptFrame, err);
        }
        return {p, total};
      }
    default:
      raise(ErrorCode::kUnsupportedFrame, "unknown frame type " + std::to_string(bytes[3]));
  }
}

std::vector<Packet> decode_stream(std::span<const std::uint8_t> bytes)
{
  std::vector<Packet> out;
  while (!bytes.empty()) {
    auto d = decode(bytes);
    out.push_back(std::move(d.packet));
    bytes = bytes.subspan(d.consumed);
  }
  return out;
}

std::string hex_dump(std::span<const std::uint8_t> bytes)
{
  std::string out;
  char buf[4];
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", bytes[i]);
    out += buf;
    out += ((i + 1) % 16 == 0 || i + 1 == bytes.size()) ? '\n' : ' ';
  }
  return out;
}

void LinkConfig::validate() const
{
  airtime(sf);
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) {
    raise(ErrorCode::kInvalidArgument, "loss probability must lie in [0, 1]");
  }
}

LinkSimulator::LinkSimulator(const LinkConfig & cfg)
: cfg_(cfg), airtime_s_(airtime(cfg.sf)), rng_(cfg.seed)
{
  cfg_.validate();
}

std::optional<Delivery> LinkSimulator::hop(std::vector<std::uint8_t> frame, double send_time_s)
{
  // One draw per hop regardless of outcome keeps the stream aligned.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < cfg_.loss_prob) {
    return std::nullopt;
  }
  return Delivery{std::move(frame), send_time_s + airtime_s_};
}

ServerIngest::ServerIngest(const IngestConfig & cfg)
: cfg_(cfg)
{
  if (!std::isfinite(cfg.deadline_after_pose_s) || cfg.deadline_after_pose_s < 0.0) {
    raise(ErrorCode::kInvalidArgument, "fusion deadline must be >= 0");
  }
}

void ServerIngest::close_until(double now_s)
{
  while (!open_.empty() && open_.front().deadline_s < now_s) {
    ready_.push_back(std::move(open_.front().input));
    open_.erase(open_.begin());
  }
}

void ServerIngest::receive(const Delivery & d)
{
  close_until(d.arrival_time_s);
  Packet packet;
  try {
    packet = decode(d.frame).packet;
  } catch (const Error &) {
    ++stats_.bad_frames;
    return;
  }

  if (const auto * pose = std::get_if<PosePacket>(&packet)) {
    const Key key{pose->device_id, pose->seq};
    if (!seen_poses_.insert(key).second) {
      ++stats_.duplicates;
      return;
    }
    ++stats_.poses;
    Pending pending{FusionInput{*pose, d.arrival_time_s, {}}, d.arrival_time_s + cfg_.deadline_after_pose_s};
    if (auto it = waiting_relays_.find(key); it != waiting_relays_.end()) {
      for (const auto & [anchor, rssi] : it->second) {
        pending.input.rssi_by_anchor[anchor] = rssi;
        ++stats_.relays_fused;
      }
      waiting_relays_.erase(it);
    }
    open_.push_back(std::move(pending));
    return;
  }

  const auto & relay = std::get<RssiRelayPacket>(packet);
  if (!seen_relays_.insert({relay.anchor_id, relay.ref_device_id, relay.ref_seq}).second) {
    ++stats_.duplicates;
    return;
  }
  const Key key{relay.ref_device_id, relay.ref_seq};
  for (auto & p : open_) {
    if (p.input.pose.device_id == key.first && p.input.pose.seq == key.second) {
      p.input.rssi_by_anchor[relay.anchor_id] = relay.rssi_dbm;
      ++stats_.relays_fused;
      return;
    }
  }
  if (seen_poses_.count(key) != 0) {
    ++stats_.late_relays;
    return;
  }
  waiting_relays_[key].emplace_back(relay.anchor_id, relay.rssi_dbm);
}

void ServerIngest::finish()
{
  close_until(std::numeric_limits<double>::infinity());
  for (const auto & [key, relays] : waiting_relays_) {
    stats_.orphan_relays += relays.size();
  }
  waiting_relays_.clear();
}

std::vector<FusionInput> ServerIngest::drain()
{
  return std::exchange(ready_, {});
}

IngestResult server_ingest(std::vector<Delivery> deliveries, const IngestConfig & cfg)
{
  std::stable_sort(
    deliveries.begin(), deliveries.end(),
    [](const Delivery & a, const Delivery & b) {return a.arrival_time_s < b.arrival_time_s;});
  ServerIngest server(cfg);
  for (const auto & d : deliveries) {
    server.receive(d);
  }
  server.finish();
  return {server.drain(), server.stats()};
}

}  // namespace lorafuse
