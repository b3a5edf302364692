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

#include "blecc/controller.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "blecc/error.hpp"

namespace blecc {

namespace {

constexpr std::uint64_t kSwitchTimer = 1;
constexpr std::uint64_t kPhaseTimer = 2;
constexpr std::uint32_t kCommandTag = 0;
constexpr std::uint32_t kArmTag = 1;  // last command of a batch

std::uint64_t timer_tag(std::uint32_t epoch, std::uint64_t kind) {
  return (static_cast<std::uint64_t>(epoch) << 8) | kind;
}

std::uint16_t wire_interval(SimTime t) { return static_cast<std::uint16_t>(t); }

void queue(ControllerState& s, const ControllerParams& p, StepOutput& out, std::vector<ChannelMessage> messages,
           SimTime now) {
  s.outbox = std::move(messages);
  ++s.switch_epoch;
  ++s.phase_epoch;
  out.timers.push_back(TimerRequest{now + p.mode_switch_latency, timer_tag(s.switch_epoch, kSwitchTimer)});
}

void arm_phase_timer(ControllerState& s, StepOutput& out, SimTime at) {
  ++s.phase_epoch;
  out.timers.push_back(TimerRequest{at, timer_tag(s.phase_epoch, kPhaseTimer)});
}

void begin_discovery(ControllerState& s, const ControllerParams& p, StepOutput& out, SimTime now) {
  s.phase = ControllerPhase::Discovering;
  s.selected.reset();
  s.select_attempts = 0;
  s.round_start = now;
  ++s.discovery_rounds;
  queue(s, p, out, {msg::Discovery{}}, now);
}

void start_part(ControllerState& s, const ControllerParams& p, StepOutput& out, SimTime now) {
  const std::size_t cap = part_capacity(s.z);
  const std::size_t begin = s.part * cap;
  const std::size_t len = std::min<std::size_t>(cap, s.total_length - begin);
  s.expected_n = segment_count(len, s.z);
  s.received.clear();
  s.window_segments = 0;
  s.start_attempts = 1;
  s.phase = ControllerPhase::Receiving;
  queue(s, p, out, {msg::StartTransfer{wire_interval(p.interval), s.part}}, now);
}

void fail(ControllerState& s, StepOutput& out, std::string why) {
  s.phase = ControllerPhase::Failed;
  ++s.phase_epoch;
  ++s.switch_epoch;
  s.outbox.clear();
  out.notes.push_back(std::move(why));
}

void finish(ControllerState& s, const ControllerParams& p, StepOutput& out, SimTime now) {
  s.phase = ControllerPhase::Done;
  s.window_segments = 0;
  if (p.stop_when_complete) {
    s.stop_sent = true;
    queue(s, p, out, {msg::StopTransfer{}}, now);
  }
}

void validate_and_advance(ControllerState& s, const ControllerParams& p, StepOutput& out, SimTime now) {
  s.phase = ControllerPhase::Validating;
  Validation v = ctrl_validate(s);
  if (auto* done = std::get_if<Complete>(&v)) {
    s.assembled.insert(s.assembled.end(), done->payload.begin(), done->payload.end());
    if (static_cast<std::size_t>(s.part) + 1 < s.parts) {
      ++s.part;
      start_part(s, p, out, now);
    } else {
      finish(s, p, out, now);
    }
    return;
  }
  const auto& missing = std::get<MissingReport>(v).missing;
  ++s.recovery_rounds;
  if (p.recovery_round_cap && s.recovery_rounds > *p.recovery_round_cap) {
    fail(s, out, fmt::format("recovery cap {} exceeded, {} missing", *p.recovery_round_cap, missing.size()));
    return;
  }
  s.phase = ControllerPhase::Recovering;
  s.window_segments = 0;
  s.requested = static_cast<std::uint32_t>(missing.size());
  std::vector<ChannelMessage> batch;
  for (auto& r : split_retransmit(missing, wire_interval(p.interval), p.command_budget)) batch.emplace_back(r);
  queue(s, p, out, std::move(batch), now);
}

bool transfer_active(const ControllerState& s, const Uuid128& uuid) {
  if (!s.selected || uuid != s.selected_uuid) return false;
  switch (s.phase) {
    case ControllerPhase::Receiving:
    case ControllerPhase::Validating:
    case ControllerPhase::Recovering:
    case ControllerPhase::Done:
      return true;
    default:
      return false;
  }
}

void on_segment(ControllerState& s, const ControllerParams& p, const msg::Segment& seg, StepOutput& out,
                SimTime now) {
  if (s.phase == ControllerPhase::Done) {
    ++s.window_segments;
    if (s.stop_sent) arm_phase_timer(s, out, now + p.effective_quiescence());
    return;
  }
  if (!s.expected_n || seg.number >= *s.expected_n) {
    out.notes.push_back(fmt::format("ProtocolViolation: segment {} outside transfer", seg.number));
    return;
  }
  ++s.window_segments;
  auto [it, inserted] = s.received.emplace(seg.number, seg.data);
  if (!inserted && it->second != seg.data) {
    out.notes.push_back(fmt::format("ProtocolViolation: conflicting copy of segment {}", seg.number));
  }
  if (p.stop_when_complete && s.received.size() == *s.expected_n) {
    validate_and_advance(s, p, out, now);
    return;
  }
  arm_phase_timer(s, out, std::max(now + p.effective_quiescence(), s.window_end));
}

void on_agent_message(ControllerState& s, const ControllerParams& p, const Uuid128& uuid,
                      const ChannelMessage& message, StepOutput& out, SimTime now) {
  if (const auto* reply = std::get_if<msg::DiscoveryReply>(&message)) {
    s.peers = observe_reply(std::move(s.peers), uuid, reply->agent, now);
    return;
  }
  if (const auto* header = std::get_if<msg::TransferHeader>(&message)) {
    if (s.phase != ControllerPhase::Selecting || uuid != s.selected_uuid) return;
    if (header->segment_bytes == 0 && header->total_length != 0) {
      out.notes.push_back("ProtocolViolation: transfer header with z=0");
      return;
    }
    s.total_length = header->total_length;
    s.z = header->segment_bytes;
    s.assembled.clear();
    s.part = 0;
    if (s.total_length == 0) {
      s.parts = 0;
      s.segments_total = 0;
      s.expected_n = 0;
      finish(s, p, out, now);
      return;
    }
    s.parts = part_count(s.total_length, s.z);
    if (s.parts > 256) {
      fail(s, out, fmt::format("payload of {} bytes needs {} parts", s.total_length, s.parts));
      return;
    }
    s.segments_total = segment_count(s.total_length, s.z);
    start_part(s, p, out, now);
    return;
  }
  if (const auto* seg = std::get_if<msg::Segment>(&message)) {
    if (transfer_active(s, uuid)) {
      on_segment(s, p, *seg, out, now);
    } else {
      out.notes.push_back(fmt::format("ProtocolViolation: segment {} while {}", seg->number, to_string(s.phase)));
    }
  }
}

void on_phase_timer(ControllerState& s, const ControllerParams& p, StepOutput& out, SimTime now) {
  switch (s.phase) {
    case ControllerPhase::Discovering: {
      s.peers = mark_unreachable(std::move(s.peers), s.round_start);
      const PeerEntry* pick = nullptr;
      if (p.target) {
        pick = s.peers.find(*p.target);
        if (pick && !pick->reachable) pick = nullptr;
      } else {
        for (const auto& e : s.peers.entries()) {
          if (e.reachable) {
            pick = &e;
            break;
          }
        }
      }
      if (pick == nullptr) {
        if (s.discovery_rounds >= p.max_discovery_rounds) {
          fail(s, out, "no agent answered discovery");
        } else {
          begin_discovery(s, p, out, now);
        }
        return;
      }
      const AgentId target = pick->agent;
      auto sel = ctrl_select(std::move(s), target);
      s = std::move(sel.state);
      s.select_attempts = 1;
      queue(s, p, out, {sel.message}, now);
      return;
    }
    case ControllerPhase::Selecting:
      if (++s.select_attempts > p.max_select_attempts) {
        begin_discovery(s, p, out, now);
      } else {
        queue(s, p, out, {msg::Select{*s.selected}}, now);
      }
      return;
    case ControllerPhase::Receiving:
      if (s.window_segments == 0) {
        if (++s.start_attempts > p.max_start_attempts) {
          fail(s, out, "agent never started transmitting");
        } else {
          queue(s, p, out, {msg::StartTransfer{wire_interval(p.interval), s.part}}, now);
        }
        return;
      }
      validate_and_advance(s, p, out, now);
      return;
    case ControllerPhase::Recovering:
      validate_and_advance(s, p, out, now);
      return;
    case ControllerPhase::Done:
      if (s.stop_sent && s.window_segments > 0) {
        s.window_segments = 0;
        queue(s, p, out, {msg::StopTransfer{}}, now);
      }
      return;
    default:
      return;
  }
}

SimTime phase_timeout(const ControllerState& s, const ControllerParams& p) {
  switch (s.phase) {
    case ControllerPhase::Discovering:
    case ControllerPhase::Selecting:
      return p.effective_discovery_timeout();
    default:
      return p.effective_quiescence();
  }
}

// Upper bound on how long the blind passes of the current part can take.
SimTime passes_span(const ControllerState& s, const ControllerParams& p) {
  std::optional<SimTime> span;
  if (p.expected_repeats && s.expected_n) {
    span = static_cast<SimTime>(*p.expected_repeats) * static_cast<SimTime>(*s.expected_n) *
           (p.interval + p.max_delay);
  }
  if (p.expected_timeout) span = span ? std::min(*span, *p.expected_timeout) : *p.expected_timeout;
  return span.value_or(0);
}

}  // namespace

const char* to_string(ControllerPhase phase) noexcept {
  switch (phase) {
    case ControllerPhase::Idle: return "Idle";
    case ControllerPhase::Discovering: return "Discovering";
    case ControllerPhase::Selecting: return "Selecting";
    case ControllerPhase::Receiving: return "Receiving";
    case ControllerPhase::Validating: return "Validating";
    case ControllerPhase::Recovering: return "Recovering";
    case ControllerPhase::Done: return "Done";
    case ControllerPhase::Failed: return "Failed";
  }
  return "?";
}

Validation ctrl_validate(const ControllerState& state) {
  if (!state.expected_n) throw Error(Errc::InvalidArgument, "segment count not known yet");
  std::vector<msg::Segment> segments;
  segments.reserve(state.received.size());
  for (const auto& [number, data] : state.received) segments.push_back(msg::Segment{number, data});
  ReassemblyResult r = reassemble(segments, *state.expected_n);
  if (auto* payload = std::get_if<Bytes>(&r)) return Complete{std::move(*payload)};
  return std::get<MissingReport>(std::move(r));
}

ControllerSelect ctrl_select(ControllerState state, const AgentId& target) {
  const PeerEntry* entry = state.peers.find(target);
  if (entry == nullptr) throw Error(Errc::UnknownAgent, "agent " + to_string(target) + " is not in the peer table");
  state.selected = target;
  state.selected_uuid = entry->uuid_v;
  state.phase = ControllerPhase::Selecting;
  return {std::move(state), msg::Select{target}};
}

ControllerStep ctrl_step(ControllerState state, const ControllerParams& p, const NodeEvent& event, SimTime now) {
  ControllerState& s = state;
  StepOutput out;
  if (std::holds_alternative<ev::Start>(event)) {
    if (s.phase == ControllerPhase::Idle) begin_discovery(s, p, out, now);
  } else if (const auto* rx = std::get_if<ev::Received>(&event)) {
    if (rx->uuid == p.uuid_a) return {std::move(state), std::move(out)};
    ChannelMessage message;
    try {
      message = decode_message(Direction::AgentToController, rx->service_data,
                               DecodeContext{transfer_active(s, rx->uuid)});
    } catch (const Error& e) {
      out.event = "rx:invalid";
      out.notes.push_back(e.what());
      return {std::move(state), std::move(out)};
    }
    out.event = "rx:" + describe(message);
    if (s.phase == ControllerPhase::Failed) return {std::move(state), std::move(out)};
    on_agent_message(s, p, rx->uuid, message, out, now);
  } else if (const auto* timer = std::get_if<ev::TimerExpiry>(&event)) {
    const std::uint64_t kind = timer->tag & 0xFF;
    const auto epoch = static_cast<std::uint32_t>(timer->tag >> 8);
    if (kind == kSwitchTimer && epoch == s.switch_epoch && !s.outbox.empty()) {
      out.event = "mode:advertise";
      for (std::size_t i = 0; i < s.outbox.size(); ++i) {
        const bool last = i + 1 == s.outbox.size();
        out.sends.push_back(Outbound{s.outbox[i], now + static_cast<SimTime>(i) * p.command_gap,
                                     last ? kArmTag : kCommandTag});
      }
      s.outbox.clear();
    } else if (kind == kPhaseTimer && epoch == s.phase_epoch) {
      out.event = "timeout";
      on_phase_timer(s, p, out, now);
    } else {
      out.event = "timer:stale";
    }
  } else if (const auto* tx = std::get_if<ev::Transmitted>(&event)) {
    if (tx->tag == kArmTag && s.phase != ControllerPhase::Failed) {
      if (s.phase == ControllerPhase::Discovering) s.round_start = now;
      SimTime at = now + phase_timeout(s, p);
      if (s.phase == ControllerPhase::Receiving) {
        s.window_end = now + passes_span(s, p);
      } else if (s.phase == ControllerPhase::Recovering) {
        s.window_end = now + static_cast<SimTime>(s.requested) * (p.interval + p.max_delay);
        at = std::max(at, s.window_end);
      }
      if (s.phase != ControllerPhase::Done || s.stop_sent) arm_phase_timer(s, out, at);
    }
  }
  return {std::move(state), std::move(out)};
}

ControllerNode::ControllerNode(std::string name, ControllerParams params, RadioProfile radio)
    : name_(std::move(name)), params_(std::move(params)), radio_(std::move(radio)) {
  params_.command_budget = radio_.budget();
  if (params_.interval <= 0 || params_.interval > 0xFFFF) {
    throw Error(Errc::InvalidArgument, fmt::format("interval {} ms does not fit the 16-bit wire field",
                                                   params_.interval));
  }
}

NodeActions ControllerNode::step(const NodeEvent& event, SimTime now, Trace& trace) {
  auto result = ctrl_step(std::move(state_), params_, event, now);
  state_ = std::move(result.state);
  return to_actions(result.out, radio_, params_.uuid_a, now, name_, to_string(state_.phase), event, trace);
}

NodeActions ControllerNode::on_start(SimTime now, Trace& trace) { return step(ev::Start{}, now, trace); }

NodeActions ControllerNode::on_advertisement(SimTime now, NodeId, const AdvertisingPdu& pdu, Trace& trace) {
  if (pdu.header_type != pdu_type::kAdvNonconnInd && pdu.header_type != pdu_type::kAdvExtInd) return {};
  ServiceDataBlock block;
  try {
    block = service_data_of(pdu);
  } catch (const Error&) {
    return {};
  }
  if (block.uuid == params_.uuid_a) return {};
  return step(ev::Received{block.uuid, std::move(block.data)}, now, trace);
}

NodeActions ControllerNode::on_timer(SimTime now, std::uint64_t tag, Trace& trace) {
  return step(ev::TimerExpiry{tag}, now, trace);
}

NodeActions ControllerNode::on_transmitted(SimTime now, std::uint32_t tag, bool blocked, Trace& trace) {
  return step(ev::Transmitted{tag, blocked}, now, trace);
}

}  // namespace blecc
