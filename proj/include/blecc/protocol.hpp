/*
 * Copyright 2026 The blecc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blecc/types.hpp"

namespace blecc {

enum class CommandCode : std::uint8_t {
  Discovery = 0x00,
  Select = 0x01,
  StartTransfer = 0x02,
  StopTransfer = 0x03,
  Retransmit = 0x04,
};

/// Permanent application-level identity of an agent.
struct AgentId {
  static constexpr std::size_t kSize = 8;
  std::array<std::uint8_t, kSize> bytes{};

  auto operator<=>(const AgentId&) const = default;
};

std::string to_string(const AgentId& id);

/// Segment numbers travel in one byte; 0xFF is reserved for the transfer
/// header, so a single transfer holds at most 255 segments (0..254).
using SegmentNumber = std::uint8_t;
inline constexpr std::size_t kMaxSegmentsPerTransfer = 255;
inline constexpr std::uint8_t kTransferHeaderMarker = 0xFF;
inline constexpr std::size_t kDiscoveryMarkerBytes = 3;

namespace msg {

struct Discovery {
  bool operator==(const Discovery&) const = default;
};

struct Select {
  AgentId target;
  bool operator==(const Select&) const = default;
};

/// `part` selects which 255-segment slice of a large payload to send; it is
/// omitted on the wire when zero.
struct StartTransfer {
  std::uint16_t interval_ms = 0;
  std::uint8_t part = 0;
  bool operator==(const StartTransfer&) const = default;
};

struct StopTransfer {
  bool operator==(const StopTransfer&) const = default;
};

struct Retransmit {
  std::vector<SegmentNumber> missing;
  std::uint16_t interval_ms = 0;
  bool operator==(const Retransmit&) const = default;
};

struct DiscoveryReply {
  AgentId agent;
  bool operator==(const DiscoveryReply&) const = default;
};

/// Sent by a selected agent: total payload size and segment body size, from
/// which the controller derives part and segment counts.
struct TransferHeader {
  std::uint32_t total_length = 0;
  std::uint8_t segment_bytes = 0;
  bool operator==(const TransferHeader&) const = default;
};

struct Segment {
  SegmentNumber number = 0;
  Bytes data;
  bool operator==(const Segment&) const = default;
};

}  // namespace msg

using ChannelMessage = std::variant<msg::Discovery, msg::Select, msg::StartTransfer, msg::StopTransfer,
                                    msg::Retransmit, msg::DiscoveryReply, msg::TransferHeader, msg::Segment>;

/// Short human-readable form used in traces, e.g. "segment:7" or "retransmit:5,77".
std::string describe(const ChannelMessage& message);

enum class Direction {
  ControllerToAgent,
  AgentToController,
};

/// Receiver-side context needed to tell a segment from a discovery reply:
/// segments are only decoded while a transfer with the sender is active.
struct DecodeContext {
  bool transfer_active = false;
};

inline constexpr std::size_t kUnboundedBudget = std::numeric_limits<std::size_t>::max();

/// Throws OversizeMessage when the encoding exceeds `budget` bytes.
Bytes encode_message(const ChannelMessage& message, std::size_t budget = kUnboundedBudget);

/// Throws UnknownCommand or MalformedArguments.
ChannelMessage decode_message(Direction direction, ByteView raw, DecodeContext context = {});

/// Largest number of segment numbers one Retransmit can carry.
std::size_t retransmit_capacity(std::size_t budget);

/// Splits a missing list into Retransmit messages that each fit `budget`.
std::vector<msg::Retransmit> split_retransmit(const std::vector<SegmentNumber>& missing,
                                              std::uint16_t interval_ms, std::size_t budget);

/// n = ceil(len / z). Throws InvalidArgument for z == 0.
std::size_t segment_count(std::size_t payload_length, std::size_t z);

/// Splits `payload` into numbered segments of at most `z` bytes. Throws
/// PayloadTooLarge above 255 * z bytes.
std::vector<msg::Segment> segment_payload(ByteView payload, std::size_t z);

/// Bytes carried by one transfer part.
std::size_t part_capacity(std::size_t z);

/// Number of sequential transfers needed for `payload_length` bytes.
std::size_t part_count(std::size_t payload_length, std::size_t z);

/// Slice of `payload` carried by transfer part `part`.
ByteView payload_part(ByteView payload, std::size_t z, std::size_t part);

struct MissingReport {
  std::vector<SegmentNumber> missing;  // ascending
  bool operator==(const MissingReport&) const = default;
};

using ReassemblyResult = std::variant<Bytes, MissingReport>;

/// Rebuilds the payload from segments. Byte-identical duplicates are fine;
/// differing duplicates throw ConflictingDuplicate, numbers >= expected_n
/// throw OutOfRangeSegment.
ReassemblyResult reassemble(const std::vector<msg::Segment>& segments, std::size_t expected_n);

struct PeerEntry {
  Uuid128 uuid_v{};
  AgentId agent;
  SimTime last_seen = 0;
  bool reachable = true;

  bool operator==(const PeerEntry&) const = default;
};

/// uuid_v -> agent mapping, one entry per agent, kept in first-seen order.
class PeerTable {
 public:
  const std::vector<PeerEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const PeerEntry* find(const AgentId& agent) const;
  const PeerEntry* find(const Uuid128& uuid_v) const;

  bool operator==(const PeerTable&) const = default;

 private:
  friend PeerTable observe_reply(PeerTable table, const Uuid128& uuid_v, const AgentId& agent, SimTime now);
  friend PeerTable mark_unreachable(PeerTable table, SimTime round_start);

  std::vector<PeerEntry> entries_;
};

/// Records a discovery reply. An agent seen under a new uuid_v replaces its
/// old mapping; the entry keeps its first-seen position.
PeerTable observe_reply(PeerTable table, const Uuid128& uuid_v, const AgentId& agent, SimTime now);

/// Flags every peer that has not replied since `round_start` as unreachable.
PeerTable mark_unreachable(PeerTable table, SimTime round_start);

}  // namespace blecc
