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
#include <string>
#include <variant>
#include <vector>

#include "blecc/pdu.hpp"
#include "blecc/protocol.hpp"
#include "blecc/types.hpp"

namespace blecc {

/// One structured log line: time, node, phase after the step, triggering
/// event, and outputs. Medium and countermeasure records use the same shape.
struct TraceLine {
  SimTime time = 0;
  std::string node;
  std::string phase;
  std::string event;
  std::string outputs;
};

/// `t=<ms> node=<name> phase=<phase> event=<event> out=<outputs>`
std::string format(const TraceLine& line);

class Trace {
 public:
  explicit Trace(bool enabled = false) : enabled_(enabled) {}

  bool enabled() const noexcept { return enabled_; }
  void add(TraceLine line) {
    if (enabled_) lines_.push_back(std::move(line));
  }
  const std::vector<TraceLine>& lines() const noexcept { return lines_; }

 private:
  bool enabled_;
  std::vector<TraceLine> lines_;
};

namespace ev {
struct Start {};
struct Received {
  Uuid128 uuid{};
  Bytes service_data;
};
struct TimerExpiry {
  std::uint64_t tag = 0;
};
struct Transmitted {
  std::uint32_t tag = 0;
  bool blocked = false;
};
}  // namespace ev

/// Input to a protocol state machine step.
using NodeEvent = std::variant<ev::Start, ev::Received, ev::TimerExpiry, ev::Transmitted>;

std::string describe(const NodeEvent& event);

struct TimerRequest {
  SimTime at = 0;
  std::uint64_t tag = 0;
};

/// A message to advertise no earlier than `base_time`; the medium adds the
/// random advertising delay. `tag` comes back in ev::Transmitted.
struct Outbound {
  ChannelMessage message;
  SimTime base_time = 0;
  std::uint32_t tag = 0;
};

struct StepOutput {
  std::vector<Outbound> sends;
  std::vector<TimerRequest> timers;
  /// Drop every advertisement this node has queued but not yet sent.
  bool cancel_pending = false;
  /// What the step made of its input, e.g. "rx:segment:7". Empty means
  /// describe(event).
  std::string event;
  /// Protocol violations and other remarks, logged and otherwise ignored.
  std::vector<std::string> notes;
};

struct AdvertRequest {
  AdvertisingPdu pdu;
  SimTime base_time = 0;
  std::uint32_t tag = 0;
};

struct NodeActions {
  std::vector<AdvertRequest> adverts;
  std::vector<TimerRequest> timers;
  bool cancel_pending = false;
};

/// A participant on the simulated broadcast medium.
class Node {
 public:
  virtual ~Node() = default;

  virtual const std::string& name() const = 0;
  virtual NodeActions on_start(SimTime now, Trace& trace) = 0;
  virtual NodeActions on_advertisement(SimTime now, NodeId sender, const AdvertisingPdu& pdu, Trace& trace) = 0;
  virtual NodeActions on_timer(SimTime now, std::uint64_t tag, Trace& trace) = 0;
  virtual NodeActions on_transmitted(SimTime now, std::uint32_t tag, bool blocked, Trace& trace) = 0;
};

/// How a protocol node puts its messages on the air.
struct RadioProfile {
  PduKind kind = PduKind::LegacyNonConnectable;
  std::optional<ExtendedConfig> extended;
  DeviceAddress address{};

  std::size_t budget() const { return max_service_data(kind, extended); }
};

/// Converts a state machine step into medium actions: encodes each outbound
/// message into a PDU carrying `uuid` and writes one trace line.
NodeActions to_actions(const StepOutput& step, const RadioProfile& radio, const Uuid128& uuid, SimTime now,
                       const std::string& node, const std::string& phase, const NodeEvent& event, Trace& trace);

}  // namespace blecc
