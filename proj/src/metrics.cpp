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

#include "blecc/metrics.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "blecc/error.hpp"
#include "blecc/protocol.hpp"

namespace blecc {

namespace {

bool delivered(const MediumEvent& e, NodeId node) {
  return std::find(e.delivered_to.begin(), e.delivered_to.end(), node) != e.delivered_to.end();
}

std::vector<CurvePoint> curve_from(const std::vector<Arrival>& arrivals, SimTime start, std::size_t n) {
  std::vector<CurvePoint> curve{{0, 0.0}};
  if (n == 0) return curve;
  std::set<std::pair<std::uint8_t, SegmentNumber>> seen;
  for (const auto& a : arrivals) {
    if (seen.emplace(a.part, a.number).second) {
      curve.push_back(CurvePoint{a.time - start, 100.0 * static_cast<double>(seen.size()) / static_cast<double>(n)});
    }
  }
  return curve;
}

}  // namespace

std::vector<Arrival> extract_arrivals(const std::vector<MediumEvent>& log, const MetricsInput& input,
                                      SimTime* start_time) {
  std::optional<SimTime> start;
  std::uint8_t part = 0;
  bool recovering = false;
  std::vector<Arrival> arrivals;
  for (const auto& e : log) {
    ServiceDataBlock block;
    try {
      block = service_data_of(e.pdu);
    } catch (const Error&) {
      continue;
    }
    if (e.sender == input.controller) {
      if (block.uuid != input.uuid_a) continue;
      ChannelMessage m;
      try {
        m = decode_message(Direction::ControllerToAgent, block.data);
      } catch (const Error&) {
        continue;
      }
      if (const auto* st = std::get_if<msg::StartTransfer>(&m)) {
        if (!start) start = e.timestamp;
        if (delivered(e, input.agent) && st->part != part) {
          part = st->part;
          recovering = false;
        }
      } else if (std::holds_alternative<msg::Retransmit>(m) && start) {
        recovering = true;
      }
    } else if (e.sender == input.agent && start && delivered(e, input.controller)) {
      ChannelMessage m;
      try {
        m = decode_message(Direction::AgentToController, block.data, DecodeContext{true});
      } catch (const Error&) {
        continue;
      }
      if (const auto* seg = std::get_if<msg::Segment>(&m)) {
        arrivals.push_back(Arrival{e.timestamp, part, seg->number, seg->data.size(), !recovering});
      }
    }
  }
  if (!start) throw Error(Errc::IncompleteLog, "log holds no StartTransfer advertisement");
  if (start_time != nullptr) *start_time = *start;
  return arrivals;
}

TransferMetrics compute_metrics(const std::vector<MediumEvent>& log, const MetricsInput& input) {
  TransferMetrics m;
  const auto arrivals = extract_arrivals(log, input, &m.start_time);
  m.received_packets = arrivals.size();
  m.last_arrival = arrivals.empty() ? m.start_time : arrivals.back().time;

  std::set<std::pair<std::uint8_t, SegmentNumber>> unique;
  std::set<std::pair<std::uint8_t, SegmentNumber>> blind;
  std::vector<SimTime> first_arrivals;
  for (const auto& a : arrivals) {
    if (unique.emplace(a.part, a.number).second) {
      m.unique_bytes += a.bytes;
      first_arrivals.push_back(a.time);
    }
    if (a.blind) blind.emplace(a.part, a.number);
  }
  m.unique_segments = unique.size();

  m.total_time = static_cast<double>(m.last_arrival - m.start_time) / 1000.0;
  m.data_rate = m.total_time > 0.0 ? static_cast<double>(m.unique_bytes) / m.total_time : 0.0;
  if (input.n > 0) {
    const auto never = static_cast<double>(input.n - std::min(input.n, blind.size()));
    m.packet_loss_pct = 100.0 * never / static_cast<double>(input.n);
  }
  if (first_arrivals.size() > 1) {
    m.mean_interarrival = static_cast<double>(first_arrivals.back() - first_arrivals.front()) / 1000.0 /
                          static_cast<double>(first_arrivals.size() - 1);
  }
  m.curve = curve_from(arrivals, m.start_time, input.n);
  return m;
}

std::vector<CurvePoint> emit_curve(const std::vector<MediumEvent>& log, const MetricsInput& input) {
  SimTime start = 0;
  const auto arrivals = extract_arrivals(log, input, &start);
  return curve_from(arrivals, start, input.n);
}

std::string metrics_csv_row(const RunLabel& label, const TransferMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{:.6f},{},{:.6f},{:.6f},{:.6f},{:.6f}", label.run_id, label.device_profile,
                     label.ble_mode, label.t_ms, label.z, label.repeats ? std::to_string(*label.repeats) : "inf",
                     label.loss_p, label.seed, m.data_rate, m.packet_loss_pct, m.mean_interarrival, m.total_time);
}

std::string curve_csv_rows(const std::string& run_id, const std::vector<CurvePoint>& curve) {
  std::string out;
  for (const auto& p : curve) out += fmt::format("{},{},{:.6f}\n", run_id, p.time_ms, p.pct);
  return out;
}

}  // namespace blecc
