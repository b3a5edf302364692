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

#include "blecc/protocol.hpp"

#include <algorithm>
#include <map>

#include "blecc/error.hpp"

namespace blecc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kDiscoveryReplyBytes = kDiscoveryMarkerBytes + AgentId::kSize;
constexpr std::size_t kTransferHeaderBytes = 1 + 4 + 1;

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get_u16(ByteView in, std::size_t at) {
  return static_cast<std::uint16_t>((in[at] << 8) | in[at + 1]);
}

AgentId get_agent(ByteView in, std::size_t at) {
  AgentId id;
  std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(at), AgentId::kSize, id.bytes.begin());
  return id;
}

ChannelMessage decode_command(ByteView raw) {
  const auto code = raw[0];
  switch (static_cast<CommandCode>(code)) {
    case CommandCode::Discovery:
      if (raw.size() != 1) throw Error(Errc::MalformedArguments, "discovery takes no arguments");
      return msg::Discovery{};
    case CommandCode::Select:
      if (raw.size() != 1 + AgentId::kSize) {
        throw Error(Errc::MalformedArguments, "select needs an 8-byte agent id");
      }
      return msg::Select{get_agent(raw, 1)};
    case CommandCode::StartTransfer:
      if (raw.size() == 3) return msg::StartTransfer{get_u16(raw, 1), 0};
      if (raw.size() == 4) return msg::StartTransfer{get_u16(raw, 1), raw[3]};
      throw Error(Errc::MalformedArguments, "start transfer needs interval and optional part");
    case CommandCode::StopTransfer:
      if (raw.size() != 1) throw Error(Errc::MalformedArguments, "stop transfer takes no arguments");
      return msg::StopTransfer{};
    case CommandCode::Retransmit: {
      if (raw.size() < 3) throw Error(Errc::MalformedArguments, "retransmit needs an interval");
      msg::Retransmit r;
      r.missing.assign(raw.begin() + 1, raw.end() - 2);
      r.interval_ms = get_u16(raw, raw.size() - 2);
      return r;
    }
  }
  throw Error(Errc::UnknownCommand, "command byte 0x" + to_hex(raw.first(1)));
}

ChannelMessage decode_agent_message(ByteView raw, DecodeContext context) {
  if (raw[0] == kTransferHeaderMarker) {
    if (raw.size() != kTransferHeaderBytes) {
      throw Error(Errc::MalformedArguments, "transfer header must be 6 bytes");
    }
    msg::TransferHeader h;
    h.total_length = (static_cast<std::uint32_t>(raw[1]) << 24) | (static_cast<std::uint32_t>(raw[2]) << 16) |
                     (static_cast<std::uint32_t>(raw[3]) << 8) | raw[4];
    h.segment_bytes = raw[5];
    return h;
  }
  const bool marker = raw.size() >= kDiscoveryMarkerBytes && raw[0] == 0 && raw[1] == 0 && raw[2] == 0;
  if (!context.transfer_active && marker) {
    if (raw.size() != kDiscoveryReplyBytes) {
      throw Error(Errc::MalformedArguments, "discovery reply must carry exactly an 8-byte agent id");
    }
    return msg::DiscoveryReply{get_agent(raw, kDiscoveryMarkerBytes)};
  }
  return msg::Segment{raw[0], Bytes(raw.begin() + 1, raw.end())};
}

}  // namespace

std::string to_string(const AgentId& id) {
  std::string hex = to_hex(id.bytes);
  std::erase(hex, ' ');
  return hex;
}

std::string describe(const ChannelMessage& message) {
  return std::visit(
      Overloaded{
          [](const msg::Discovery&) { return std::string("discovery"); },
          [](const msg::Select& m) { return "select:" + to_string(m.target); },
          [](const msg::StartTransfer& m) {
            return "start:t=" + std::to_string(m.interval_ms) + ",part=" + std::to_string(m.part);
          },
          [](const msg::StopTransfer&) { return std::string("stop"); },
          [](const msg::Retransmit& m) {
            std::string s = "retransmit:";
            for (std::size_t i = 0; i < m.missing.size(); ++i) {
              if (i != 0) s += ',';
              s += std::to_string(m.missing[i]);
            }
            return s;
          },
          [](const msg::DiscoveryReply& m) { return "reply:" + to_string(m.agent); },
          [](const msg::TransferHeader& m) {
            return "header:len=" + std::to_string(m.total_length) + ",z=" + std::to_string(m.segment_bytes);
          },
          [](const msg::Segment& m) { return "segment:" + std::to_string(m.number); },
      },
      message);
}

Bytes encode_message(const ChannelMessage& message, std::size_t budget) {
  Bytes out = std::visit(
      Overloaded{
          [](const msg::Discovery&) { return Bytes{static_cast<std::uint8_t>(CommandCode::Discovery)}; },
          [](const msg::Select& m) {
            Bytes b{static_cast<std::uint8_t>(CommandCode::Select)};
            b.insert(b.end(), m.target.bytes.begin(), m.target.bytes.end());
            return b;
          },
          [](const msg::StartTransfer& m) {
            Bytes b{static_cast<std::uint8_t>(CommandCode::StartTransfer)};
            put_u16(b, m.interval_ms);
            if (m.part != 0) b.push_back(m.part);
            return b;
          },
          [](const msg::StopTransfer&) { return Bytes{static_cast<std::uint8_t>(CommandCode::StopTransfer)}; },
          [](const msg::Retransmit& m) {
            Bytes b{static_cast<std::uint8_t>(CommandCode::Retransmit)};
            b.insert(b.end(), m.missing.begin(), m.missing.end());
            put_u16(b, m.interval_ms);
            return b;
          },
          [](const msg::DiscoveryReply& m) {
            Bytes b(kDiscoveryMarkerBytes, 0x00);
            b.insert(b.end(), m.agent.bytes.begin(), m.agent.bytes.end());
            return b;
          },
          [](const msg::TransferHeader& m) {
            return Bytes{kTransferHeaderMarker,
                         static_cast<std::uint8_t>(m.total_length >> 24),
                         static_cast<std::uint8_t>(m.total_length >> 16),
                         static_cast<std::uint8_t>(m.total_length >> 8),
                         static_cast<std::uint8_t>(m.total_length),
                         m.segment_bytes};
          },
          [](const msg::Segment& m) {
            if (m.number == kTransferHeaderMarker) {
              throw Error(Errc::OutOfRangeSegment, "segment number 255 is reserved");
            }
            Bytes b{m.number};
            b.insert(b.end(), m.data.begin(), m.data.end());
            return b;
          },
      },
      message);
  if (out.size() > budget) {
    throw Error(Errc::OversizeMessage, describe(message) + " needs " + std::to_string(out.size()) +
                                           " bytes, budget is " + std::to_string(budget));
  }
  return out;
}

ChannelMessage decode_message(Direction direction, ByteView raw, DecodeContext context) {
  if (raw.empty()) throw Error(Errc::MalformedArguments, "empty service data");
  return direction == Direction::ControllerToAgent ? decode_command(raw) : decode_agent_message(raw, context);
}

std::size_t retransmit_capacity(std::size_t budget) {
  if (budget < 4) throw Error(Errc::OversizeMessage, "budget too small for any retransmit entry");
  return std::min(kMaxSegmentsPerTransfer, budget - 3);
}

std::vector<msg::Retransmit> split_retransmit(const std::vector<SegmentNumber>& missing,
                                              std::uint16_t interval_ms, std::size_t budget) {
  const std::size_t per_message = retransmit_capacity(budget);
  std::vector<msg::Retransmit> out;
  for (std::size_t i = 0; i < missing.size(); i += per_message) {
    const auto end = std::min(missing.size(), i + per_message);
    out.push_back(msg::Retransmit{{missing.begin() + static_cast<std::ptrdiff_t>(i),
                                   missing.begin() + static_cast<std::ptrdiff_t>(end)},
                                  interval_ms});
  }
  return out;
}

std::size_t segment_count(std::size_t payload_length, std::size_t z) {
  if (z == 0) throw Error(Errc::InvalidArgument, "segment size z must be at least 1");
  return (payload_length + z - 1) / z;
}

std::vector<msg::Segment> segment_payload(ByteView payload, std::size_t z) {
  const std::size_t n = segment_count(payload.size(), z);
  if (n > kMaxSegmentsPerTransfer) {
    throw Error(Errc::PayloadTooLarge, std::to_string(payload.size()) + " bytes need " + std::to_string(n) +
                                           " segments of " + std::to_string(z) + ", cap is 255");
  }
  std::vector<msg::Segment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto chunk = payload.subspan(i * z, std::min(z, payload.size() - i * z));
    out.push_back(msg::Segment{static_cast<SegmentNumber>(i), Bytes(chunk.begin(), chunk.end())});
  }
  return out;
}

std::size_t part_capacity(std::size_t z) {
  if (z == 0) throw Error(Errc::InvalidArgument, "segment size z must be at least 1");
  return kMaxSegmentsPerTransfer * z;
}

std::size_t part_count(std::size_t payload_length, std::size_t z) {
  const std::size_t cap = part_capacity(z);
  return (payload_length + cap - 1) / cap;
}

ByteView payload_part(ByteView payload, std::size_t z, std::size_t part) {
  const std::size_t cap = part_capacity(z);
  const std::size_t begin = part * cap;
  if (begin > payload.size() || (begin == payload.size() && part != 0)) {
    throw Error(Errc::InvalidArgument, "transfer part " + std::to_string(part) + " beyond payload");
  }
  return payload.subspan(begin, std::min(cap, payload.size() - begin));
}

ReassemblyResult reassemble(const std::vector<msg::Segment>& segments, std::size_t expected_n) {
  std::map<SegmentNumber, const Bytes*> by_number;
  for (const auto& s : segments) {
    if (s.number >= expected_n) {
      throw Error(Errc::OutOfRangeSegment,
                  "segment " + std::to_string(s.number) + " >= n=" + std::to_string(expected_n));
    }
    auto [it, inserted] = by_number.emplace(s.number, &s.data);
    if (!inserted && *it->second != s.data) {
      throw Error(Errc::ConflictingDuplicate, "segment " + std::to_string(s.number) + " seen with different data");
    }
  }
  if (by_number.size() < expected_n) {
    MissingReport report;
    for (std::size_t i = 0; i < expected_n; ++i) {
      if (!by_number.contains(static_cast<SegmentNumber>(i))) {
        report.missing.push_back(static_cast<SegmentNumber>(i));
      }
    }
    return report;
  }
  Bytes payload;
  for (const auto& [number, data] : by_number) payload.insert(payload.end(), data->begin(), data->end());
  return payload;
}

const PeerEntry* PeerTable::find(const AgentId& agent) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const PeerEntry& e) { return e.agent == agent; });
  return it == entries_.end() ? nullptr : &*it;
}

const PeerEntry* PeerTable::find(const Uuid128& uuid_v) const {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const PeerEntry& e) { return e.uuid_v == uuid_v; });
  return it == entries_.end() ? nullptr : &*it;
}

PeerTable observe_reply(PeerTable table, const Uuid128& uuid_v, const AgentId& agent, SimTime now) {
  auto& entries = table.entries_;
  // A uuid_v now owned by a different agent is stale.
  std::erase_if(entries, [&](const PeerEntry& e) { return e.uuid_v == uuid_v && e.agent != agent; });
  auto it = std::find_if(entries.begin(), entries.end(), [&](const PeerEntry& e) { return e.agent == agent; });
  if (it == entries.end()) {
    entries.push_back(PeerEntry{uuid_v, agent, now, true});
  } else {
    it->uuid_v = uuid_v;
    it->last_seen = now;
    it->reachable = true;
  }
  return table;
}

PeerTable mark_unreachable(PeerTable table, SimTime round_start) {
  for (auto& e : table.entries_) {
    if (e.last_seen < round_start) e.reachable = false;
  }
  return table;
}

}  // namespace blecc
