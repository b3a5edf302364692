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
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blecc/node.hpp"
#include "blecc/protocol.hpp"
#include "blecc/types.hpp"

namespace blecc {

enum class ControllerPhase {
  Idle,
  Discovering,
  Selecting,
  Receiving,
  Validating,
  Recovering,
  Done,
  Failed,
};

const char* to_string(ControllerPhase phase) noexcept;

struct ControllerParams {
  Uuid128 uuid_a{};
  /// Interval t sent with StartTransfer and Retransmit.
  SimTime interval = 1000;
  /// Upper bound of the medium's advertising delay; feeds the default timeouts.
  SimTime max_delay = 10;
  /// Defaults to 2 * (t + max_delay).
  std::optional<SimTime> discovery_timeout;
  /// Silence that ends a receiving window. Defaults to 3 * t + max_delay.
  std::optional<SimTime> quiescence;
  /// nullopt is unbounded.
  std::optional<std::uint32_t> recovery_round_cap = 50;
  /// The agent's configured R and T, if known. A receiving window is not
  /// closed before the passes they imply can have finished.
  std::optional<std::uint32_t> expected_repeats;
  std::optional<SimTime> expected_timeout;
  /// Delay between deciding to advertise and the advertiser being ready.
  SimTime mode_switch_latency = 0;
  /// Spacing between consecutive commands of one batch, e.g. split Retransmits.
  SimTime command_gap = 20;
  std::uint32_t max_select_attempts = 5;
  std::uint32_t max_start_attempts = 10;
  std::uint32_t max_discovery_rounds = 50;
  /// Send StopTransfer once the payload is complete (needed for R = inf).
  bool stop_when_complete = false;
  std::optional<AgentId> target;
  /// Service-data bytes per command advertisement.
  std::size_t command_budget = 13;

  SimTime effective_discovery_timeout() const { return discovery_timeout.value_or(2 * (interval + max_delay)); }
  SimTime effective_quiescence() const { return quiescence.value_or(3 * interval + max_delay); }
};

struct ControllerState {
  ControllerPhase phase = ControllerPhase::Idle;
  PeerTable peers;
  std::optional<AgentId> selected;
  Uuid128 selected_uuid{};

  std::uint32_t total_length = 0;
  std::uint8_t z = 0;
  std::size_t parts = 0;
  std::uint8_t part = 0;
  std::optional<std::size_t> expected_n;
  std::map<SegmentNumber, Bytes> received;
  Bytes assembled;  // completed parts
  std::size_t segments_total = 0;  // n summed over all parts

  /// Commands waiting for the advertiser; sent when the mode switch completes.
  std::vector<ChannelMessage> outbox;
  std::uint32_t switch_epoch = 0;
  std::uint32_t phase_epoch = 0;
  SimTime round_start = 0;
  std::uint32_t window_segments = 0;
  /// Earliest time the current receiving window may close.
  SimTime window_end = 0;
  std::uint32_t requested = 0;  // segments asked for in the current recovery round

  std::uint32_t recovery_rounds = 0;
  std::uint32_t select_attempts = 0;
  std::uint32_t start_attempts = 0;
  std::uint32_t discovery_rounds = 0;
  bool stop_sent = false;

  bool operator==(const ControllerState&) const = default;
};

struct ControllerStep {
  ControllerState state;
  StepOutput out;
};

/// One deterministic transition. Outbound commands only leave on the
/// mode-switch timer, never directly from a received advertisement.
ControllerStep ctrl_step(ControllerState state, const ControllerParams& params, const NodeEvent& event, SimTime now);

struct Complete {
  Bytes payload;
  bool operator==(const Complete&) const = default;
};

using Validation = std::variant<Complete, MissingReport>;

/// Checks the current transfer part. Throws InvalidArgument before n is known.
Validation ctrl_validate(const ControllerState& state);

struct ControllerSelect {
  ControllerState state;
  msg::Select message;
};

/// Throws UnknownAgent when `target` is not in the peer table.
ControllerSelect ctrl_select(ControllerState state, const AgentId& target);

/// Medium adapter around ctrl_step.
class ControllerNode : public Node {
 public:
  ControllerNode(std::string name, ControllerParams params, RadioProfile radio);

  const std::string& name() const override { return name_; }
  NodeActions on_start(SimTime now, Trace& trace) override;
  NodeActions on_advertisement(SimTime now, NodeId sender, const AdvertisingPdu& pdu, Trace& trace) override;
  NodeActions on_timer(SimTime now, std::uint64_t tag, Trace& trace) override;
  NodeActions on_transmitted(SimTime now, std::uint32_t tag, bool blocked, Trace& trace) override;

  const ControllerState& state() const noexcept { return state_; }
  const ControllerParams& params() const noexcept { return params_; }

 private:
  NodeActions step(const NodeEvent& event, SimTime now, Trace& trace);

  std::string name_;
  ControllerParams params_;
  RadioProfile radio_;
  ControllerState state_;
};

}  // namespace blecc
