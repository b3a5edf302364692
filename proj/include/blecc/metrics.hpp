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

#include "blecc/medium.hpp"
#include "blecc/types.hpp"

namespace blecc {

/// Who is who in a medium log, plus the transfer parameters.
struct MetricsInput {
  NodeId controller = 0;
  NodeId agent = 1;
  Uuid128 uuid_a{};
  std::size_t payload_length = 0;
  /// Segment count summed over all transfer parts.
  std::size_t n = 0;
  std::size_t z = 12;
  std::optional<std::uint32_t> repeats = 3;
  SimTime interval = 1000;
};

struct CurvePoint {
  SimTime time_ms = 0;  // since the transfer start
  double pct = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

/// One segment copy that reached the controller.
struct Arrival {
  SimTime time = 0;
  std::uint8_t part = 0;
  SegmentNumber number = 0;
  std::size_t bytes = 0;
  /// Arrived before the controller asked for any retransmission of this part.
  bool blind = true;
};

struct TransferMetrics {
  /// Unique payload bytes per second of total_time.
  double data_rate = 0.0;
  /// Share of the n segments that no blind pass delivered.
  double packet_loss_pct = 0.0;
  /// Mean gap between first arrivals of unique segments, seconds.
  double mean_interarrival = 0.0;
  /// StartTransfer advertisement to the last received segment, seconds.
  double total_time = 0.0;
  std::vector<CurvePoint> curve;

  SimTime start_time = 0;
  SimTime last_arrival = 0;
  std::size_t received_packets = 0;  // duplicates included
  std::size_t unique_segments = 0;
  std::size_t unique_bytes = 0;
};

/// Segment copies received by the controller after the first StartTransfer,
/// in log order. Throws IncompleteLog when no StartTransfer went on air.
std::vector<Arrival> extract_arrivals(const std::vector<MediumEvent>& log, const MetricsInput& input,
                                      SimTime* start_time = nullptr);

/// Duplicates count once everywhere. Throws IncompleteLog.
TransferMetrics compute_metrics(const std::vector<MediumEvent>& log, const MetricsInput& input);

/// Step curve of unique segments received over time, starting at (0, 0).
std::vector<CurvePoint> emit_curve(const std::vector<MediumEvent>& log, const MetricsInput& input);

/// Labels of one metrics row.
struct RunLabel {
  std::string run_id;
  std::string device_profile;
  std::string ble_mode;
  SimTime t_ms = 0;
  std::size_t z = 0;
  std::optional<std::uint32_t> repeats;
  double loss_p = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr const char* kMetricsCsvHeader =
    "run_id,device_profile,ble_mode,t_ms,z,R,loss_p,seed,data_rate_Bps,loss_pct,interarrival_s,total_time_s";
inline constexpr const char* kCurvesCsvHeader = "run_id,time_ms,pct";

std::string metrics_csv_row(const RunLabel& label, const TransferMetrics& m);
std::string curve_csv_rows(const std::string& run_id, const std::vector<CurvePoint>& curve);

}  // namespace blecc
