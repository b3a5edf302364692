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

#include "blecc/error.hpp"
#include "blecc/metrics.hpp"
#include "blecc/scenario.hpp"
#include "test_support.hpp"

namespace blecc {
namespace {

using testing::binomial_half_width;
using testing::random_bytes;

TransferSetup setup_for(std::size_t len, SimTime t, double loss, std::uint64_t seed) {
  TransferSetup setup;
  std::mt19937_64 rng(len + seed);
  setup.payload = random_bytes(rng, len);
  setup.z = 12;
  setup.interval = t;
  setup.repeats = 3;
  setup.uuid_a = default_uuid_a();
  setup.medium.loss = BernoulliLoss{loss};
  setup.medium.seed = seed;
  setup.identity_seed = seed;
  return setup;
}

bool is_start(const MediumEvent& e) {
  const auto data = service_data_of(e.pdu).data;
  return e.sender == 0 && !data.empty() && data[0] == 0x02;
}

TEST(ComputeMetrics, LosslessTotalTimeFromSchedule) {
  for (SimTime t : {1000, 2000, 3000}) {
    const auto out = simulate_transfer(setup_for(1236, t, 0.0, static_cast<std::uint64_t>(t)));
    ASSERT_TRUE(out.metrics);
    const auto& m = *out.metrics;

    // Rebuild the schedule: the first segment is based at the StartTransfer
    // advert, every later one t after its predecessor went on air.
    SimTime start = -1;
    SimTime base = 0;
    SimTime delay_sum = 0;
    std::size_t count = 0;
    SimTime last = 0;
    for (const auto& e : out.log) {
      if (start < 0 && is_start(e)) {
        start = e.timestamp;
        base = start;
        continue;
      }
      if (start < 0 || e.sender != 1) continue;
      const SimTime d = e.timestamp - base;
      ASSERT_GE(d, 0);
      ASSERT_LE(d, 10);
      delay_sum += d;
      base = e.timestamp + t;
      last = e.timestamp;
      ++count;
    }
    ASSERT_EQ(count, 309u);
    EXPECT_EQ(m.start_time, start);
    EXPECT_EQ(m.last_arrival, last);
    EXPECT_EQ(last - start, (3 * 103 - 1) * t + delay_sum);
    EXPECT_DOUBLE_EQ(m.total_time, static_cast<double>((3 * 103 - 1) * t + delay_sum) / 1000.0);
    EXPECT_DOUBLE_EQ(m.data_rate, 1236.0 / m.total_time);
    EXPECT_EQ(m.packet_loss_pct, 0.0);
    EXPECT_EQ(m.unique_segments, 103u);
    EXPECT_EQ(m.unique_bytes, 1236u);
    EXPECT_EQ(m.received_packets, 309u);
  }
}

TEST(ComputeMetrics, RateNearAnalyticValue) {
  const auto out = simulate_transfer(setup_for(1236, 1000, 0.0, 1));
  const double oracle = 1236.0 / ((3.0 * 103.0 - 1.0) * (1.000 + 0.005));
  EXPECT_NEAR(out.metrics->data_rate, oracle, 0.02 * oracle);
  // First arrivals of the 103 unique segments are one pass apart.
  EXPECT_NEAR(out.metrics->mean_interarrival, 1.005, 0.003);
}

TEST(ComputeMetrics, UniqueNeverExceedsN) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto out = simulate_transfer(setup_for(600, 500, 0.4, seed));
    ASSERT_TRUE(out.metrics);
    EXPECT_LE(out.metrics->unique_segments, 50u);
    EXPECT_GE(out.metrics->received_packets, out.metrics->unique_segments);
    if (out.complete) {
      EXPECT_EQ(out.metrics->unique_segments, 50u);
    }
  }
}

TEST(ComputeMetrics, BlindLossMatchesCube) {
  // 1000 short transfers, pooled: a segment is lost to the blind passes with
  // probability p^3.
  const double p = 0.3;
  std::size_t lost = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto setup = setup_for(120, 100, p, seed);
    const auto out = simulate_transfer(setup);
    ASSERT_TRUE(out.metrics);
    lost += static_cast<std::size_t>(std::lround(out.metrics->packet_loss_pct * 10.0 / 100.0));
    total += 10;
  }
  const double frac = static_cast<double>(lost) / static_cast<double>(total);
  EXPECT_NEAR(frac, p * p * p, binomial_half_width(p * p * p, static_cast<double>(total)));
}

TEST(EmitCurve, MonotoneAndBounded) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto out = simulate_transfer(setup_for(1236, 1000, 0.3, seed));
    const auto& curve = out.metrics->curve;
    ASSERT_FALSE(curve.empty());
    EXPECT_EQ(curve.front(), (CurvePoint{0, 0.0}));
    for (std::size_t i = 1; i < curve.size(); ++i) {
      ASSERT_GE(curve[i].time_ms, curve[i - 1].time_ms);
      ASSERT_GT(curve[i].pct, curve[i - 1].pct);
      ASSERT_LE(curve[i].pct, 100.0);
    }
    if (out.complete) {
      EXPECT_DOUBLE_EQ(curve.back().pct, 100.0);
    }
    EXPECT_EQ(curve, emit_curve(out.log, out.metrics_input));
  }
}

TEST(EmitCurve, UnboundedRepeatsReachFullAfterOnePass) {
  auto setup = setup_for(1236, 1000, 0.0, 4);
  setup.repeats.reset();
  setup.controller.stop_when_complete = true;
  const auto out = simulate_transfer(setup);
  ASSERT_TRUE(out.complete);
  const auto& curve = out.metrics->curve;
  EXPECT_DOUBLE_EQ(curve.back().pct, 100.0);
  EXPECT_GE(curve.back().time_ms, 102 * 1000);
  EXPECT_LE(curve.back().time_ms, 102 * 1010 + 10);
}

TEST(EmitCurve, NothingReceivedIsFlat) {
  const Uuid128 uuid_a = default_uuid_a();
  const Uuid128 uuid_v{9};
  std::vector<MediumEvent> log;
  MediumEvent start;
  start.timestamp = 100;
  start.sender = 0;
  start.pdu = build_pdu(PduKind::LegacyNonConnectable, {}, uuid_a, encode_message(msg::StartTransfer{1000, 0}),
                        std::nullopt);
  start.delivered_to = {1};
  log.push_back(start);
  for (int i = 0; i < 5; ++i) {
    MediumEvent seg;
    seg.timestamp = 200 + 1000 * i;
    seg.sender = 1;
    seg.pdu = build_pdu(PduKind::LegacyNonConnectable, {}, uuid_v,
                        encode_message(msg::Segment{static_cast<SegmentNumber>(i), Bytes(12, 1)}), std::nullopt);
    seg.dropped_for = {0};
    log.push_back(seg);
  }
  MetricsInput in;
  in.uuid_a = uuid_a;
  in.payload_length = 60;
  in.n = 5;
  const auto curve = emit_curve(log, in);
  for (const auto& pt : curve) EXPECT_EQ(pt.pct, 0.0);
  const auto m = compute_metrics(log, in);
  EXPECT_EQ(m.unique_segments, 0u);
  EXPECT_DOUBLE_EQ(m.packet_loss_pct, 100.0);
  EXPECT_EQ(m.data_rate, 0.0);
}

TEST(ComputeMetrics, DuplicatesCountedOnce) {
  const Uuid128 uuid_a = default_uuid_a();
  const Uuid128 uuid_v{9};
  std::vector<MediumEvent> log;
  MediumEvent start;
  start.timestamp = 0;
  start.pdu = build_pdu(PduKind::LegacyNonConnectable, {}, uuid_a, encode_message(msg::StartTransfer{1000, 0}),
                        std::nullopt);
  start.delivered_to = {1};
  log.push_back(start);
  const SegmentNumber order[] = {0, 1, 1, 0, 1};
  for (int i = 0; i < 5; ++i) {
    MediumEvent seg;
    seg.timestamp = 1000 * (i + 1);
    seg.sender = 1;
    seg.pdu = build_pdu(PduKind::LegacyNonConnectable, {}, uuid_v, encode_message(msg::Segment{order[i], Bytes(12, 1)}),
                        std::nullopt);
    seg.delivered_to = {0};
    log.push_back(seg);
  }
  MetricsInput in;
  in.uuid_a = uuid_a;
  in.payload_length = 24;
  in.n = 2;
  const auto m = compute_metrics(log, in);
  EXPECT_EQ(m.unique_segments, 2u);
  EXPECT_EQ(m.received_packets, 5u);
  EXPECT_DOUBLE_EQ(m.total_time, 5.0);
  EXPECT_DOUBLE_EQ(m.data_rate, 24.0 / 5.0);
  EXPECT_DOUBLE_EQ(m.mean_interarrival, 1.0);
  EXPECT_EQ(emit_curve(log, in), (std::vector<CurvePoint>{{0, 0.0}, {1000, 50.0}, {2000, 100.0}}));
}

TEST(ComputeMetrics, IncompleteLog) {
  MetricsInput in;
  in.n = 3;
  try {
    compute_metrics({}, in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IncompleteLog);
  }
}

TEST(MetricsCsv, RowFormat) {
  RunLabel label{"run-1", "phone", "legacy", 1000, 12, 3, 0.0, 7};
  TransferMetrics m;
  m.data_rate = 3.99;
  m.packet_loss_pct = 0.0;
  m.mean_interarrival = 1.005;
  m.total_time = 309.5;
  EXPECT_EQ(metrics_csv_row(label, m), "run-1,phone,legacy,1000,12,3,0.000000,7,3.990000,0.000000,1.005000,309.500000");
  label.repeats.reset();
  EXPECT_NE(metrics_csv_row(label, m).find(",inf,"), std::string::npos);
  EXPECT_EQ(curve_csv_rows("r", {{0, 0.0}, {1000, 50.0}}), "r,0,0.000000\nr,1000,50.000000\n");
  EXPECT_EQ(std::string(kMetricsCsvHeader).substr(0, 6), "run_id");
}

}  // namespace
}  // namespace blecc
