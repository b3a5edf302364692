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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "blecc/error.hpp"
#include "blecc/protocol.hpp"
#include "test_support.hpp"

namespace blecc {
namespace {

using testing::random_bytes;
using testing::uniform;

AgentId make_id(std::uint8_t base) {
  AgentId id;
  for (std::size_t i = 0; i < AgentId::kSize; ++i) id.bytes[i] = static_cast<std::uint8_t>(base + i);
  return id;
}

Uuid128 make_uuid(std::uint8_t v) {
  Uuid128 u{};
  u.fill(v);
  return u;
}

Errc code_of(Direction d, const Bytes& raw, DecodeContext ctx = {}) {
  try {
    decode_message(d, raw, ctx);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decoded " << to_hex(raw);
  return Errc::InvalidArgument;
}

TEST(EncodeMessage, DiscoveryIsSingleZeroByte) { EXPECT_EQ(encode_message(msg::Discovery{}), Bytes{0x00}); }

TEST(EncodeMessage, SelectIsOneThenId) {
  const AgentId id = make_id(0xA0);
  Bytes expected{0x01, 0xA0, 0xA1, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7};
  EXPECT_EQ(encode_message(msg::Select{id}), expected);
}

TEST(EncodeMessage, CommandLayouts) {
  EXPECT_EQ(encode_message(msg::StartTransfer{1000, 0}), (Bytes{0x02, 0x03, 0xE8}));
  EXPECT_EQ(encode_message(msg::StartTransfer{3000, 2}), (Bytes{0x02, 0x0B, 0xB8, 0x02}));
  EXPECT_EQ(encode_message(msg::StopTransfer{}), Bytes{0x03});
  EXPECT_EQ(encode_message(msg::Retransmit{{5, 77}, 1000}), (Bytes{0x04, 5, 77, 0x03, 0xE8}));
  EXPECT_EQ(encode_message(msg::DiscoveryReply{make_id(1)}), (Bytes{0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(encode_message(msg::TransferHeader{1236, 12}), (Bytes{0xFF, 0x00, 0x00, 0x04, 0xD4, 12}));
  EXPECT_EQ(encode_message(msg::Segment{7, {9, 9}}), (Bytes{7, 9, 9}));
}

TEST(EncodeMessage, BudgetAndReservedNumber) {
  EXPECT_THROW(encode_message(msg::Segment{3, Bytes(13, 0)}, 13), Error);
  EXPECT_NO_THROW(encode_message(msg::Segment{3, Bytes(12, 0)}, 13));
  try {
    encode_message(msg::Segment{255, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRangeSegment);
  }
}

TEST(DecodeMessage, AgentMessages) {
  const AgentId id = make_id(0x10);
  Bytes reply{0, 0, 0};
  reply.insert(reply.end(), id.bytes.begin(), id.bytes.end());
  EXPECT_EQ(decode_message(Direction::AgentToController, reply), ChannelMessage(msg::DiscoveryReply{id}));

  Bytes seg{0x07};
  seg.insert(seg.end(), 12, 0x42);
  EXPECT_EQ(decode_message(Direction::AgentToController, seg, {true}),
            ChannelMessage(msg::Segment{7, Bytes(12, 0x42)}));
}

TEST(DecodeMessage, UnknownCommand) {
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0xFF}), Errc::UnknownCommand);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x05}), Errc::UnknownCommand);
}

TEST(DecodeMessage, MalformedArguments) {
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x00, 0x01}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x01, 1, 2, 3}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x02, 1}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x03, 1}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::ControllerToAgent, {0x04, 1}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::AgentToController, {0xFF, 1, 2}), Errc::MalformedArguments);
  EXPECT_EQ(code_of(Direction::AgentToController, {0, 0, 0, 1}), Errc::MalformedArguments);
}

TEST(DecodeMessage, RoundTripAllVariants) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    std::vector<SegmentNumber> missing(uniform(rng, 0, 10));
    for (auto& m : missing) m = static_cast<SegmentNumber>(rng() % 255);
    const auto t = static_cast<std::uint16_t>(rng());
    const std::vector<ChannelMessage> commands{
        msg::Discovery{}, msg::Select{make_id(static_cast<std::uint8_t>(rng()))},
        msg::StartTransfer{t, static_cast<std::uint8_t>(rng())}, msg::StopTransfer{}, msg::Retransmit{missing, t}};
    for (const auto& m : commands) {
      ASSERT_EQ(decode_message(Direction::ControllerToAgent, encode_message(m)), m);
    }
    const msg::TransferHeader header{static_cast<std::uint32_t>(rng()), static_cast<std::uint8_t>(rng())};
    ASSERT_EQ(decode_message(Direction::AgentToController, encode_message(header)), ChannelMessage(header));
    const msg::DiscoveryReply reply{make_id(static_cast<std::uint8_t>(rng()))};
    ASSERT_EQ(decode_message(Direction::AgentToController, encode_message(reply)), ChannelMessage(reply));
    const msg::Segment seg{static_cast<SegmentNumber>(rng() % 255), random_bytes(rng, uniform(rng, 0, 12))};
    ASSERT_EQ(decode_message(Direction::AgentToController, encode_message(seg), {true}), ChannelMessage(seg));
  }
}

// A segment 0 whose data starts with two zero bytes looks like a discovery
// reply; the active-transfer flag tells them apart.
TEST(DecodeMessage, ReplyMarkerNeverMisparsed) {
  std::mt19937_64 rng(6);
  for (int session = 0; session < 1000000; ++session) {
    const bool active = rng() % 2 == 0;
    ChannelMessage sent;
    if (active) {
      Bytes data = random_bytes(rng, uniform(rng, 0, 12));
      const auto number = static_cast<SegmentNumber>(rng() % 4 == 0 ? 0 : rng() % 255);
      if (rng() % 2 == 0 && data.size() >= 2) data[0] = data[1] = 0;
      if (rng() % 8 == 0) data = Bytes(10, 0);
      sent = msg::Segment{number, std::move(data)};
    } else {
      AgentId id;
      for (auto& b : id.bytes) b = static_cast<std::uint8_t>(rng() % 3 == 0 ? 0 : rng());
      sent = msg::DiscoveryReply{id};
    }
    const auto got = decode_message(Direction::AgentToController, encode_message(sent), {active});
    ASSERT_EQ(got, sent) << session;
  }
}

TEST(Segmentation, KnownCounts) {
  EXPECT_EQ(segment_count(1236, 12), 103u);
  EXPECT_EQ(segment_count(6180, 237), 27u);
  EXPECT_EQ(segment_count(6180, 170), 37u);
  EXPECT_EQ(segment_payload(Bytes(1236, 1), 12).size(), 103u);
  EXPECT_EQ(segment_payload(Bytes(6180, 1), 237).size(), 27u);
  EXPECT_EQ(segment_payload(Bytes(6180, 1), 170).size(), 37u);
  EXPECT_TRUE(segment_payload({}, 12).empty());
  EXPECT_THROW(segment_count(10, 0), Error);
}

TEST(Segmentation, LastSegmentIsShort) {
  const auto segs = segment_payload(Bytes(1236, 1), 12);
  EXPECT_EQ(segs.back().data.size(), 12u);
  const auto ext = segment_payload(Bytes(6180, 1), 237);
  EXPECT_EQ(ext.back().data.size(), 6180u - 26u * 237u);
}

TEST(Segmentation, TooManySegments) {
  EXPECT_NO_THROW(segment_payload(Bytes(255, 0), 1));
  try {
    segment_payload(Bytes(256, 0), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PayloadTooLarge);
  }
}

TEST(Segmentation, PartsCoverPayload) {
  EXPECT_EQ(part_capacity(12), 255u * 12u);
  EXPECT_EQ(part_count(0, 12), 0u);
  EXPECT_EQ(part_count(3060, 12), 1u);
  EXPECT_EQ(part_count(3061, 12), 2u);
  const Bytes payload(7000, 3);
  std::size_t total = 0;
  for (std::size_t p = 0; p < part_count(payload.size(), 12); ++p) total += payload_part(payload, 12, p).size();
  EXPECT_EQ(total, payload.size());
  EXPECT_THROW(payload_part(payload, 12, 3), Error);
}

TEST(Reassemble, RoundTripAndDenseNumbering) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t z = uniform(rng, 1, 237);
    const Bytes payload = random_bytes(rng, uniform(rng, 0, std::min<std::size_t>(255 * z, 4000)));
    auto segs = segment_payload(payload, z);
    ASSERT_EQ(segs.size(), segment_count(payload.size(), z));
    for (std::size_t k = 0; k < segs.size(); ++k) ASSERT_EQ(segs[k].number, k);
    std::shuffle(segs.begin(), segs.end(), rng);
    ASSERT_EQ(std::get<Bytes>(reassemble(segs, segment_count(payload.size(), z))), payload);
  }
}

TEST(Reassemble, ReportsMissing) {
  auto segs = segment_payload(Bytes(1236, 9), 12);
  std::erase_if(segs, [](const msg::Segment& s) { return s.number == 5 || s.number == 77; });
  EXPECT_EQ(std::get<MissingReport>(reassemble(segs, 103)).missing, (std::vector<SegmentNumber>{5, 77}));
  EXPECT_EQ(std::get<MissingReport>(reassemble({}, 3)).missing, (std::vector<SegmentNumber>{0, 1, 2}));
}

TEST(Reassemble, Duplicates) {
  std::mt19937_64 rng(8);
  const Bytes payload = random_bytes(rng, 1236);
  auto segs = segment_payload(payload, 12);
  segs.push_back(segs[3]);
  EXPECT_EQ(std::get<Bytes>(reassemble(segs, 103)), payload);
  segs.back().data[0] ^= 1;
  try {
    reassemble(segs, 103);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConflictingDuplicate);
  }
  try {
    reassemble({msg::Segment{103, {}}}, 103);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRangeSegment);
  }
}

TEST(Retransmit, SplitsToBudget) {
  EXPECT_EQ(retransmit_capacity(13), 10u);
  std::vector<SegmentNumber> missing;
  for (int i = 0; i < 25; ++i) missing.push_back(static_cast<SegmentNumber>(i * 3));
  const auto parts = split_retransmit(missing, 1000, 13);
  ASSERT_EQ(parts.size(), 3u);
  std::vector<SegmentNumber> joined;
  for (const auto& r : parts) {
    EXPECT_LE(encode_message(r).size(), 13u);
    joined.insert(joined.end(), r.missing.begin(), r.missing.end());
  }
  EXPECT_EQ(joined, missing);
  EXPECT_TRUE(split_retransmit({}, 1000, 13).empty());
}

TEST(PeerTable, Observations) {
  PeerTable t;
  t = observe_reply(t, make_uuid(1), make_id(1), 10);
  EXPECT_EQ(t.size(), 1u);
  t = observe_reply(t, make_uuid(2), make_id(1), 20);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.entries()[0].uuid_v, make_uuid(2));
  EXPECT_EQ(t.find(make_uuid(1)), nullptr);
  t = observe_reply(t, make_uuid(3), make_id(2), 30);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.entries()[0].agent, make_id(1));
}

TEST(PeerTable, SizeEqualsDistinctAgents) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    PeerTable t;
    std::set<AgentId> agents;
    for (int i = 0; i < 50; ++i) {
      const AgentId id = make_id(static_cast<std::uint8_t>(rng() % 12));
      // Fresh uuid per reply, so mappings never collide across agents.
      Uuid128 uuid{};
      for (auto& b : uuid) b = static_cast<std::uint8_t>(rng());
      t = observe_reply(t, uuid, id, i);
      agents.insert(id);
      ASSERT_EQ(t.size(), agents.size());
    }
  }
}

TEST(PeerTable, MarkUnreachable) {
  PeerTable t;
  t = observe_reply(t, make_uuid(1), make_id(1), 10);
  t = observe_reply(t, make_uuid(2), make_id(2), 50);
  t = mark_unreachable(t, 40);
  EXPECT_FALSE(t.find(make_id(1))->reachable);
  EXPECT_TRUE(t.find(make_id(2))->reachable);
  t = observe_reply(t, make_uuid(1), make_id(1), 60);
  EXPECT_TRUE(t.find(make_id(1))->reachable);
}

}  // namespace
}  // namespace blecc
