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

#include "blecc/agent.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "blecc/error.hpp"

namespace blecc {

namespace {

constexpr std::uint64_t kDeadlineTimer = 1;

std::uint64_t deadline_tag(std::uint32_t epoch) { return (static_cast<std::uint64_t>(epoch) << 8) | kDeadlineTimer; }

void halt(AgentState& s, StepOutput& out) {
  out.cancel_pending = true;
  ++s.epoch;
  s.retransmit_queue.clear();
}

void send_segment(AgentState& s, StepOutput& out, SegmentNumber number, SimTime base, std::uint32_t tag) {
  out.sends.push_back(Outbound{s.segments.at(number), base, tag});
}

// Picks what follows a segment that has just gone on air (or been blocked).
void continue_transfer(AgentState& s, const AgentConfig& cfg, StepOutput& out, SimTime now) {
  const SimTime base = now + s.interval;
  if (!s.retransmit_queue.empty()) {
    const SegmentNumber number = s.retransmit_queue.front();
    s.retransmit_queue.erase(s.retransmit_queue.begin());
    send_segment(s, out, number, base, agent_tag::kRetransmit);
    return;
  }
  const bool passes_left = !cfg.repeats || s.pass < *cfg.repeats;
  if (passes_left && !s.segments.empty()) {
    send_segment(s, out, static_cast<SegmentNumber>(s.next_segment), base, agent_tag::kPass);
    return;
  }
  s.phase = AgentPhase::AwaitInstruction;
}

void on_command(AgentState& s, const AgentConfig& cfg, const ChannelMessage& message, StepOutput& out,
                SimTime now) {
  if (std::holds_alternative<msg::Discovery>(message)) {
    if (s.phase == AgentPhase::Transmitting || s.selected) halt(s, out);
    s.selected = false;
    s.phase = AgentPhase::Replying;
    out.sends.push_back(Outbound{msg::DiscoveryReply{cfg.id}, now, agent_tag::kControl});
    return;
  }
  if (const auto* select = std::get_if<msg::Select>(&message)) {
    if (select->target == cfg.id) {
      halt(s, out);
      s.selected = true;
      s.phase = AgentPhase::AwaitInstruction;
      out.sends.push_back(Outbound{
          msg::TransferHeader{static_cast<std::uint32_t>(cfg.payload.size()), static_cast<std::uint8_t>(cfg.z)},
          now, agent_tag::kControl});
    } else if (s.phase != AgentPhase::Listening || s.selected) {
      halt(s, out);
      s.selected = false;
      s.phase = AgentPhase::Listening;
    }
    return;
  }
  if (!s.selected) {
    out.notes.push_back("not selected");
    return;
  }
  if (const auto* start = std::get_if<msg::StartTransfer>(&message)) {
    const std::size_t parts = std::max<std::size_t>(1, part_count(cfg.payload.size(), cfg.z));
    if (start->part >= parts) {
      out.notes.push_back(fmt::format("part {} beyond {} parts", start->part, parts));
      return;
    }
    halt(s, out);
    s.interval = start->interval_ms;
    s.part = start->part;
    s.segments = segment_payload(payload_part(cfg.payload, cfg.z, start->part), cfg.z);
    s.pass = 0;
    s.next_segment = 0;
    if (cfg.timeout) out.timers.push_back(TimerRequest{now + *cfg.timeout, deadline_tag(s.epoch)});
    if (s.segments.empty() || (cfg.repeats && *cfg.repeats == 0)) {
      s.phase = AgentPhase::AwaitInstruction;
      return;
    }
    s.phase = AgentPhase::Transmitting;
    send_segment(s, out, 0, now, agent_tag::kPass);
    return;
  }
  if (std::holds_alternative<msg::StopTransfer>(message)) {
    halt(s, out);
    s.phase = AgentPhase::AwaitInstruction;
    return;
  }
  if (const auto* retransmit = std::get_if<msg::Retransmit>(&message)) {
    try {
      auto r = agent_retransmit(s, retransmit->missing, retransmit->interval_ms);
      s = std::move(r.state);
    } catch (const Error& e) {
      out.notes.push_back(e.what());
      return;
    }
    if (s.phase != AgentPhase::Transmitting && !s.retransmit_queue.empty()) {
      s.phase = AgentPhase::Transmitting;
      const SegmentNumber number = s.retransmit_queue.front();
      s.retransmit_queue.erase(s.retransmit_queue.begin());
      send_segment(s, out, number, now, agent_tag::kRetransmit);
    }
    return;
  }
  out.notes.push_back("unexpected " + describe(message));
}

}  // namespace

const char* to_string(AgentPhase phase) noexcept {
  switch (phase) {
    case AgentPhase::Listening: return "Listening";
    case AgentPhase::Replying: return "Replying";
    case AgentPhase::AwaitSelection: return "AwaitSelection";
    case AgentPhase::Transmitting: return "Transmitting";
    case AgentPhase::AwaitInstruction: return "AwaitInstruction";
  }
  return "?";
}

AgentRetransmit agent_retransmit(AgentState state, const std::vector<SegmentNumber>& missing, SimTime interval) {
  for (SegmentNumber number : missing) {
    if (number >= state.segments.size()) {
      throw Error(Errc::OutOfRangeSegment,
                  fmt::format("retransmit of segment {} but n={}", number, state.segments.size()));
    }
  }
  std::vector<SegmentNumber> requested = missing;
  std::sort(requested.begin(), requested.end());
  requested.erase(std::unique(requested.begin(), requested.end()), requested.end());

  auto& queue = state.retransmit_queue;
  std::vector<SegmentNumber> merged;
  std::set_union(queue.begin(), queue.end(), requested.begin(), requested.end(), std::back_inserter(merged));
  queue = std::move(merged);
  if (!requested.empty()) state.interval = interval;

  AgentRetransmit result{std::move(state), {}};
  for (SegmentNumber number : requested) result.segments.push_back(result.state.segments[number]);
  return result;
}

AgentStep agent_step(AgentState state, const AgentConfig& config, const NodeEvent& event, SimTime now) {
  StepOutput out;
  if (const auto* rx = std::get_if<ev::Received>(&event)) {
    if (rx->uuid != config.uuid_a) {
      out.notes.push_back("foreign uuid");
      return {std::move(state), std::move(out)};
    }
    ChannelMessage message;
    try {
      message = decode_message(Direction::ControllerToAgent, rx->service_data);
    } catch (const Error& e) {
      out.event = "rx:invalid";
      out.notes.push_back(e.what());
      return {std::move(state), std::move(out)};
    }
    out.event = "rx:" + describe(message);
    on_command(state, config, message, out, now);
  } else if (const auto* timer = std::get_if<ev::TimerExpiry>(&event)) {
    if (timer->tag == deadline_tag(state.epoch) && state.phase == AgentPhase::Transmitting) {
      halt(state, out);
      state.phase = AgentPhase::AwaitInstruction;
      out.notes.push_back("deadline");
    }
  } else if (const auto* tx = std::get_if<ev::Transmitted>(&event)) {
    if (tx->tag == agent_tag::kControl) {
      if (state.phase == AgentPhase::Replying) state.phase = AgentPhase::AwaitSelection;
    } else if (state.phase == AgentPhase::Transmitting) {
      if (!tx->blocked) ++state.emitted_segments;
      if (tx->tag == agent_tag::kPass && ++state.next_segment == state.segments.size()) {
        state.next_segment = 0;
        ++state.pass;
      }
      continue_transfer(state, config, out, now);
    }
  }
  return {std::move(state), std::move(out)};
}

AgentNode::AgentNode(std::string name, AgentConfig config, RadioProfile radio)
    : name_(std::move(name)), config_(std::move(config)), radio_(std::move(radio)) {
  if (config_.z == 0 || config_.z + 1 > radio_.budget()) {
    throw Error(Errc::InvalidArgument,
                fmt::format("segment size z={} does not fit {} service-data bytes", config_.z, radio_.budget()));
  }
}

NodeActions AgentNode::step(const NodeEvent& event, SimTime now, Trace& trace) {
  auto result = agent_step(std::move(state_), config_, event, now);
  state_ = std::move(result.state);
  return to_actions(result.out, radio_, config_.uuid_v, now, name_, to_string(state_.phase), event, trace);
}

NodeActions AgentNode::on_start(SimTime now, Trace& trace) { return step(ev::Start{}, now, trace); }

NodeActions AgentNode::on_advertisement(SimTime now, NodeId, const AdvertisingPdu& pdu, Trace& trace) {
  if (pdu.header_type != pdu_type::kAdvNonconnInd && pdu.header_type != pdu_type::kAdvExtInd) return {};
  ServiceDataBlock block;
  try {
    block = service_data_of(pdu);
  } catch (const Error&) {
    return {};
  }
  if (block.uuid != config_.uuid_a) return {};
  return step(ev::Received{block.uuid, std::move(block.data)}, now, trace);
}

NodeActions AgentNode::on_timer(SimTime now, std::uint64_t tag, Trace& trace) {
  return step(ev::TimerExpiry{tag}, now, trace);
}

NodeActions AgentNode::on_transmitted(SimTime now, std::uint32_t tag, bool blocked, Trace& trace) {
  return step(ev::Transmitted{tag, blocked}, now, trace);
}

}  // namespace blecc
