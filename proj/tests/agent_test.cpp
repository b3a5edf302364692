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

#include <memory>
#include <random>

#include "blecc/agent.hpp"
#include "blecc/error.hpp"
#include "blecc/medium.hpp"
#include "blecc/scenario.hpp"
#include "test_support.hpp"

namespace blecc {
namespace {

using testing::random_bytes;

const Uuid128 kUuidA{0xAA, 0xAA, 1};
const Uuid128 kUuidV{0x55, 0x55, 2};

AgentId id_of(std::uint8_t v) {
  AgentId id;
  id.bytes.fill(v);
  return id;
}

AgentConfig make_config(std::size_t payload_len = 1236, std::optional<std::uint32_t> repeats = 3,
                        std::optional<SimTime> timeout = std::nullopt) {
  std::mt19937_64 rng(payload_len);
  AgentConfig cfg;
  cfg.id = id_of(7);
  cfg.uuid_a = kUuidA;
  cfg.uuid_v = kUuidV;
  cfg.payload = random_bytes(rng, payload_len);
  cfg.z = 12;
  cfg.repeats = repeats;
  cfg.timeout = timeout;
  return cfg;
}

ev::Received command(const ChannelMessage& m) { return ev::Received{kUuidA, encode_message(m)}; }

AgentStep feed(AgentState s, const AgentConfig& cfg, const ChannelMessage& m, SimTime now = 0) {
  return agent_step(std::move(s), cfg, command(m), now);
}

AgentState selected_state(const AgentConfig& cfg) {
  return feed(AgentState{}, cfg, msg::Select{cfg.id}).state;
}

TEST(AgentStep, DiscoveryIsAnswered) {
  const auto cfg = make_config();
  const auto r = feed(AgentState{}, cfg, msg::Discovery{}, 50);
  EXPECT_EQ(r.state.phase, AgentPhase::Replying);
  ASSERT_EQ(r.out.sends.size(), 1u);
  EXPECT_EQ(r.out.sends[0].message, ChannelMessage(msg::DiscoveryReply{cfg.id}));
  EXPECT_EQ(r.out.sends[0].base_time, 50);
  const auto after = agent_step(r.state, cfg, ev::Transmitted{agent_tag::kControl, false}, 55);
  EXPECT_EQ(after.state.phase, AgentPhase::AwaitSelection);
}

TEST(AgentStep, SelectForAnotherAgentIgnored) {
  const auto cfg = make_config();
  const auto r = feed(AgentState{}, cfg, msg::Select{id_of(9)});
  EXPECT_TRUE(r.out.sends.empty());
  EXPECT_EQ(r.state.phase, AgentPhase::Listening);
  EXPECT_FALSE(r.state.selected);
}

TEST(AgentStep, SelectSendsTransferHeader) {
  const auto cfg = make_config();
  const auto r = feed(AgentState{}, cfg, msg::Select{cfg.id});
  EXPECT_TRUE(r.state.selected);
  ASSERT_EQ(r.out.sends.size(), 1u);
  EXPECT_EQ(r.out.sends[0].message, ChannelMessage(msg::TransferHeader{1236, 12}));
}

TEST(AgentStep, DeselectedBySelectOfOther) {
  const auto cfg = make_config();
  auto s = selected_state(cfg);
  s = feed(s, cfg, msg::StartTransfer{1000, 0}).state;
  ASSERT_EQ(s.phase, AgentPhase::Transmitting);
  const auto r = feed(s, cfg, msg::Select{id_of(9)});
  EXPECT_EQ(r.state.phase, AgentPhase::Listening);
  EXPECT_FALSE(r.state.selected);
  EXPECT_TRUE(r.out.cancel_pending);
}

TEST(AgentStep, CommandsIgnoredUntilSelected) {
  const auto cfg = make_config();
  const auto r = feed(AgentState{}, cfg, msg::StartTransfer{1000, 0});
  EXPECT_TRUE(r.out.sends.empty());
  EXPECT_EQ(r.state.phase, AgentPhase::Listening);
}

TEST(AgentStep, ForeignUuidAndGarbageIgnored) {
  const auto cfg = make_config();
  auto r = agent_step(AgentState{}, cfg, ev::Received{kUuidV, Bytes{0x00}}, 0);
  EXPECT_TRUE(r.out.sends.empty());
  r = agent_step(AgentState{}, cfg, ev::Received{kUuidA, Bytes{0x09, 1}}, 0);
  EXPECT_TRUE(r.out.sends.empty());
  EXPECT_EQ(r.state, AgentState{});
}

TEST(AgentStep, StartChainsSegments) {
  const auto cfg = make_config();
  auto r = feed(selected_state(cfg), cfg, msg::StartTransfer{1000, 0}, 100);
  ASSERT_EQ(r.out.sends.size(), 1u);
  EXPECT_EQ(r.out.sends[0].message, ChannelMessage(msg::Segment{0, Bytes(cfg.payload.begin(), cfg.payload.begin() + 12)}));
  EXPECT_EQ(r.out.sends[0].base_time, 100);
  r = agent_step(r.state, cfg, ev::Transmitted{agent_tag::kPass, false}, 104);
  ASSERT_EQ(r.out.sends.size(), 1u);
  EXPECT_EQ(std::get<msg::Segment>(r.out.sends[0].message).number, 1);
  EXPECT_EQ(r.out.sends[0].base_time, 1104);
}

TEST(AgentRetransmit, QueuesRequestedSegments) {
  const auto cfg = make_config();
  auto s = feed(selected_state(cfg), cfg, msg::StartTransfer{1000, 0}).state;
  const auto r = agent_retransmit(s, {77, 5, 5}, 2000);
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_EQ(r.segments[0].number, 5);
  EXPECT_EQ(r.segments[1].number, 77);
  EXPECT_EQ(r.state.retransmit_queue, (std::vector<SegmentNumber>{5, 77}));
  EXPECT_EQ(r.state.interval, 2000);
}

TEST(AgentRetransmit, EmptyRequest) {
  const auto cfg = make_config();
  auto s = feed(selected_state(cfg), cfg, msg::StartTransfer{1000, 0}).state;
  const auto r = agent_retransmit(s, {}, 1000);
  EXPECT_TRUE(r.segments.empty());
  EXPECT_EQ(r.state, s);
}

TEST(AgentRetransmit, OutOfRange) {
  const auto cfg = make_config();
  auto s = feed(selected_state(cfg), cfg, msg::StartTransfer{1000, 0}).state;
  try {
    agent_retransmit(s, {5, 200}, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRangeSegment);
  }
  // Through the state machine the bad request is ignored.
  const auto r = feed(s, cfg, msg::Retransmit{{200}, 1000});
  EXPECT_TRUE(r.out.sends.empty());
  EXPECT_EQ(r.state, s);
}

TEST(AgentStep, RetransmitAfterPassesEmitsMissing) {
  const auto cfg = make_config(24, 1);
  auto s = feed(selected_state(cfg), cfg, msg::StartTransfer{1000, 0}).state;
  s = agent_step(s, cfg, ev::Transmitted{agent_tag::kPass, false}, 10).state;
  s = agent_step(s, cfg, ev::Transmitted{agent_tag::kPass, false}, 1010).state;
  ASSERT_EQ(s.phase, AgentPhase::AwaitInstruction);
  auto r = feed(s, cfg, msg::Retransmit{{1}, 500}, 3000);
  ASSERT_EQ(r.out.sends.size(), 1u);
  EXPECT_EQ(std::get<msg::Segment>(r.out.sends[0].message).number, 1);
  r = agent_step(r.state, cfg, ev::Transmitted{agent_tag::kRetransmit, false}, 3005);
  EXPECT_TRUE(r.out.sends.empty());
  EXPECT_EQ(r.state.phase, AgentPhase::AwaitInstruction);
}

TEST(AgentNode, RejectsOversizeSegments) {
  auto cfg = make_config();
  cfg.z = 13;
  EXPECT_THROW(AgentNode("a", cfg, RadioProfile{}), Error);
  cfg.z = 12;
  EXPECT_NO_THROW(AgentNode("a", cfg, RadioProfile{}));
}

TransferSetup lossless_setup(SimTime t) {
  TransferSetup setup;
  std::mt19937_64 rng(1236);
  setup.payload = random_bytes(rng, 1236);
  setup.z = 12;
  setup.interval = t;
  setup.repeats = 3;
  setup.uuid_a = default_uuid_a();
  return setup;
}

std::vector<SimTime> segment_times(const TransferOutcome& out, NodeId agent) {
  std::vector<SimTime> times;
  bool started = false;
  for (const auto& e : out.log) {
    const auto block = service_data_of(e.pdu);
    if (e.sender == 0 && block.data.size() >= 1 && block.data[0] == 0x02) started = true;
    if (e.sender == agent && started) times.push_back(e.timestamp);
  }
  return times;
}

TEST(AgentInMedium, ThreePassesEmitRTimesN) {
  const auto out = simulate_transfer(lossless_setup(1000));
  ASSERT_TRUE(out.complete);
  ASSERT_EQ(out.agent_segments.size(), 1u);
  EXPECT_EQ(out.agent_segments[0], 309u);
  EXPECT_EQ(segment_times(out, 1).size(), 309u);
  ASSERT_TRUE(out.metrics);
  EXPECT_EQ(out.metrics->unique_segments, 103u);
  EXPECT_EQ(out.metrics->received_packets, 309u);
}

TEST(AgentInMedium, SpacingIsIntervalPlusDelay) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto setup = lossless_setup(1000);
    setup.medium.seed = seed;
    setup.medium.max_delay_ms = 10;
    const auto out = simulate_transfer(setup);
    const auto times = segment_times(out, 1);
    ASSERT_EQ(times.size(), 309u);
    for (std::size_t i = 1; i < times.size(); ++i) {
      const SimTime d = times[i] - times[i - 1] - 1000;
      ASSERT_GE(d, 0);
      ASSERT_LE(d, 10);
    }
  }
}

/// Scripted controller: selects the agent, starts the transfer and goes quiet.
class Commander final : public Node {
 public:
  Commander(AgentId target, SimTime interval) : target_(target), interval_(interval) {}
  const std::string& name() const override { return name_; }
  NodeActions on_start(SimTime now, Trace&) override {
    NodeActions a;
    a.adverts.push_back(advert(msg::Select{target_}, now));
    a.adverts.push_back(advert(msg::StartTransfer{static_cast<std::uint16_t>(interval_), 0}, now + 100));
    return a;
  }
  NodeActions on_advertisement(SimTime, NodeId, const AdvertisingPdu&, Trace&) override { return {}; }
  NodeActions on_timer(SimTime, std::uint64_t, Trace&) override { return {}; }
  NodeActions on_transmitted(SimTime now, std::uint32_t tag, bool, Trace&) override {
    if (tag == 1) start_time = now;
    return {};
  }
  SimTime start_time = -1;

 private:
  AdvertRequest advert(const ChannelMessage& m, SimTime base) {
    const std::uint32_t tag = std::holds_alternative<msg::StartTransfer>(m) ? 1 : 0;
    return AdvertRequest{build_pdu(PduKind::LegacyNonConnectable, {}, kUuidA, encode_message(m), std::nullopt),
                         base, tag};
  }
  AgentId target_;
  SimTime interval_;
  std::string name_ = "commander";
};

TEST(AgentInMedium, DeadlineStopsUnboundedRepeats) {
  for (SimTime timeout : {5000, 20000, 33333}) {
    const auto cfg = make_config(1236, std::nullopt, timeout);
    MediumConfig mc;
    mc.seed = static_cast<std::uint64_t>(timeout);
    Medium medium(mc);
    auto commander = std::make_unique<Commander>(cfg.id, 100);
    auto* c = commander.get();
    medium.add_node(std::move(commander));
    auto agent = std::make_unique<AgentNode>("agent", cfg, RadioProfile{});
    auto* a = agent.get();
    medium.add_node(std::move(agent));
    medium.run_until();
    ASSERT_GE(c->start_time, 0);
    const SimTime deadline = c->start_time + timeout;
    SimTime last = -1;
    std::size_t count = 0;
    for (const auto& e : medium.log()) {
      if (e.sender != 1 || e.timestamp < c->start_time) continue;
      last = e.timestamp;
      ++count;
    }
    EXPECT_LT(last, deadline) << timeout;
    EXPECT_GE(last, deadline - 110) << timeout;
    EXPECT_GT(count, static_cast<std::size_t>(timeout / 110)) << timeout;
    EXPECT_EQ(a->state().phase, AgentPhase::AwaitInstruction);
  }
}

}  // namespace
}  // namespace blecc
