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

#ifndef LORAFUSE__BACKHAUL_HPP_
#define LORAFUSE__BACKHAUL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace lorafuse
{

// Frame layout (little-endian):
//   0x4C 0x52 | version 0x01 | type | payload length | payload | CRC-16/CCITT-FALSE
// The CRC covers every byte before it.
inline constexpr std::uint8_t kMagic0 = 0x4C;
inline constexpr std::uint8_t kMagic1 = 0x52;
inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::uint8_t kTypePose = 0x00;
inline constexpr std::uint8_t kTypeRelay = 0x01;
inline constexpr std::size_t kHeaderSize = 5;
inline constexpr std::size_t kCrcSize = 2;
inline constexpr std::size_t kPosePayloadSize = 46;
inline constexpr std::size_t kRelayPayloadSize = 10;
inline constexpr std::size_t kPoseFrameSize = kHeaderSize + kPosePayloadSize + kCrcSize;
inline constexpr std::size_t kRelayFrameSize = kHeaderSize + kRelayPayloadSize + kCrcSize;

inline constexpr std::int16_t kMinRssiDbm = -160;
inline constexpr std::int16_t kMaxRssiDbm = 30;

/// Pose broadcast from the wearable transmitter. Only translation and yaw
/// feed the 2D filter; the quaternion is optional (all zeros = absent).
struct PosePacket
{
  std::uint16_t device_id = 0;
  std::uint32_t seq = 0;
  std::uint64_t timestamp_ms = 0;
  std::array<float, 3> translation{0.0F, 0.0F, 0.0F};
  float yaw = 0.0F;
  std::array<float, 4> quaternion{0.0F, 0.0F, 0.0F, 0.0F};  // w, x, y, z

  bool has_quaternion() const;
  bool operator==(const PosePacket &) const = default;
};

/// RSSI an anchor measured on a pose broadcast, relayed to the server.
struct RssiRelayPacket
{
  std::uint16_t anchor_id = 0;
  std::uint16_t ref_device_id = 0;
  std::uint32_t ref_seq = 0;
  std::int16_t rssi_dbm = 0;

  bool operator==(const RssiRelayPacket &) const = default;
};

using Packet = std::variant<PosePacket, RssiRelayPacket>;

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes);

/// Throws kInvalidArgument if the packet breaks its invariants.
std::vector<std::uint8_t> encode(const PosePacket & p);
std::vector<std::uint8_t> encode(const RssiRelayPacket & p);
std::vector<std::uint8_t> encode(const Packet & p);

struct DecodedFrame
{
  Packet packet;
  std::size_t consumed;
};

/// Decodes the frame at the start of `bytes`; trailing bytes are left for
/// the caller. Errors: kTruncatedFrame, kNotAFrame, kCorruptFrame (CRC or
/// field invariants), kUnsupportedFrame (version / type / length).
DecodedFrame decode(std::span<const std::uint8_t> bytes);

/// Decodes a back-to-back frame dump. Stops at the first error.
std::vector<Packet> decode_stream(std::span<const std::uint8_t> bytes);

/// "4c 52 01 ..." with a newline every 16 bytes.
std::string hex_dump(std::span<const std::uint8_t> bytes);

struct LinkConfig
{
  int sf = 7;
  double loss_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Delivery
{
  std::vector<std::uint8_t> frame;
  double arrival_time_s;
};

/// One LoRa hop: arrival = send + airtime(sf), dropped with probability
/// loss_prob. Deterministic for a given seed and call sequence.
class LinkSimulator
{
public:
  explicit LinkSimulator(const LinkConfig & cfg);

  std::optional<Delivery> hop(std::vector<std::uint8_t> frame, double send_time_s);

  const LinkConfig & config() const {return cfg_;}

private:
  LinkConfig cfg_;
  double airtime_s_;
  std::mt19937_64 rng_;
};

inline std::optional<Delivery> simulate_hop(
  LinkSimulator & link, std::vector<std::uint8_t> frame, double send_time_s)
{
  return link.hop(std::move(frame), send_time_s);
}

/// A pose and the RSSIs relayed for it in time.
struct FusionInput
{
  PosePacket pose;
  double pose_arrival_s = 0.0;
  std::map<std::uint16_t, std::int16_t> rssi_by_anchor;
};

struct IngestStats
{
  std::size_t poses = 0;
  std::size_t relays_fused = 0;
  std::size_t late_relays = 0;
  std::size_t orphan_relays = 0;
  std::size_t duplicates = 0;
  std::size_t bad_frames = 0;
};

struct IngestConfig
{
  /// A relay is fused if it arrives no later than pose arrival + this.
  double deadline_after_pose_s = 0.1;
};

/// Server side association of relays with pose broadcasts by (device, seq).
///
/// Frames must be pushed in non-decreasing arrival order. Inputs are emitted
/// in pose arrival order once their deadline has passed (or on finish()).
class ServerIngest
{
public:
  explicit ServerIngest(const IngestConfig & cfg);

  void receive(const Delivery & d);

  /// Closes every open window; relays still waiting for an unseen pose are
  /// dropped as orphans.
  void finish();

  /// Takes the inputs emitted so far.
  std::vector<FusionInput> drain();

  const IngestStats & stats() const {return stats_;}

private:
  using Key = std::pair<std::uint16_t, std::uint32_t>;

  struct Pending
  {
    FusionInput input;
    double deadline_s;
  };

  void close_until(double now_s);

  IngestConfig cfg_;
  std::vector<Pending> open_;
  std::set<Key> seen_poses_;
  std::set<std::tuple<std::uint16_t, std::uint16_t, std::uint32_t>> seen_relays_;
  std::map<Key, std::vector<std::pair<std::uint16_t, std::int16_t>>> waiting_relays_;
  std::vector<FusionInput> ready_;
  IngestStats stats_;
};

struct IngestResult
{
  std::vector<FusionInput> inputs;
  IngestStats stats;
};

/// Batch form: sorts deliveries by arrival time (stable) and runs ServerIngest.
IngestResult server_ingest(std::vector<Delivery> deliveries, const IngestConfig & cfg);

}  // namespace lorafuse

#endif  // LORAFUSE__BACKHAUL_HPP_
