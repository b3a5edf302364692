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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blecc/node.hpp"
#include "blecc/protocol.hpp"
#include "blecc/types.hpp"

namespace blecc {

enum class AgentPhase {
  Listening,
  Replying,
  AwaitSelection,
  Transmitting,
  AwaitInstruction,
};

const char* to_string(AgentPhase phase) noexcept;

/// Advertisement tags reported back through ev::Transmitted.
namespace agent_tag {
inline constexpr std::uint32_t kControl = 0;
inline constexpr std::uint32_t kPass = 1;
inline constexpr std::uint32_t kRetransmit = 2;
}  // namespace agent_tag

struct AgentConfig {
  AgentId id;
  /// Commands are only accepted from advertisements carrying this UUID.
  Uuid128 uuid_a{};
  Uuid128 uuid_v{};
  Bytes payload;
  std::size_t z = 12;
  /// Full passes per StartTransfer; nullopt repeats until the deadline.
  std::optional<std::uint32_t> repeats = 3;
  /// Transmission timeout, measured from the StartTransfer that began the pass.
  std::optional<SimTime> timeout;
};

struct AgentState {
  AgentPhase phase = AgentPhase::Listening;
  bool selected = false;
  SimTime interval = 0;
  std::uint8_t part = 0;
  std::vector<msg::Segment> segments;
  std::uint32_t pass = 0;
  std::size_t next_segment = 0;
  /// Pending retransmissions, ascending and unique. Served before passes.
  std::vector<SegmentNumber> retransmit_queue;
  /// Bumped whenever a transfer starts or stops; stale deadline timers carry
  /// an older value and are ignored.
  std::uint32_t epoch = 0;
  std::uint64_t emitted_segments = 0;

  bool operator==(const AgentState&) const = default;
};

struct AgentStep {
  AgentState state;
  StepOutput out;
};

/// One deterministic transition. Segments are chained: the next one is
/// queued when the previous one has gone on air, at that time plus t.
AgentStep agent_step(AgentState state, const AgentConfig& config, const NodeEvent& event, SimTime now);

struct AgentRetransmit {
  AgentState state;
  /// The segments that will be re-sent, ascending.
  std::vector<msg::Segment> segments;
};

/// Queues `missing` for retransmission at interval `interval`. Throws
/// OutOfRangeSegment when a number is not below n.
AgentRetransmit agent_retransmit(AgentState state, const std::vector<SegmentNumber>& missing, SimTime interval);

/// Medium adapter around agent_step.
class AgentNode : public Node {
 public:
  AgentNode(std::string name, AgentConfig config, RadioProfile radio);

  const std::string& name() const override { return name_; }
  NodeActions on_start(SimTime now, Trace& trace) override;
  NodeActions on_advertisement(SimTime now, NodeId sender, const AdvertisingPdu& pdu, Trace& trace) override;
  NodeActions on_timer(SimTime now, std::uint64_t tag, Trace& trace) override;
  NodeActions on_transmitted(SimTime now, std::uint32_t tag, bool blocked, Trace& trace) override;

  const AgentState& state() const noexcept { return state_; }
  const AgentConfig& config() const noexcept { return config_; }

 private:
  NodeActions step(const NodeEvent& event, SimTime now, Trace& trace);

  std::string name_;
  AgentConfig config_;
  RadioProfile radio_;
  AgentState state_;
};

}  // namespace blecc
