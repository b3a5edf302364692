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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blecc/controller.hpp"
#include "blecc/countermeasures.hpp"
#include "blecc/medium.hpp"
#include "blecc/metrics.hpp"
#include "blecc/pdu.hpp"

namespace blecc {

/// Everything needed for one simulated transfer: one controller (node 0)
/// and `agents` agents (nodes 1..agents), all holding the same payload.
struct TransferSetup {
  PduKind kind = PduKind::LegacyNonConnectable;
  std::optional<ExtendedConfig> extended;
  std::size_t z = 12;
  Bytes payload;
  SimTime interval = 1000;
  std::optional<std::uint32_t> repeats = 3;
  std::optional<SimTime> timeout;
  MediumConfig medium;
  /// `interval`, `max_delay` and `uuid_a` are filled in from this setup.
  ControllerParams controller;
  /// Attached to every agent.
  std::vector<Policy> policies;
  std::size_t agents = 1;
  /// Index into the agents; nullopt picks the first one heard.
  std::optional<std::size_t> target;
  Uuid128 uuid_a{};
  /// Seeds agent ids, uuid_v values and addresses (separate from the medium seed).
  std::uint64_t identity_seed = 1;
};

struct TransferOutcome {
  bool complete = false;
  /// Payload as reconstructed by the controller (empty unless complete).
  Bytes received;
  ControllerPhase phase = ControllerPhase::Idle;
  std::uint32_t recovery_rounds = 0;
  std::size_t segments = 0;
  /// Node id of the agent that was selected, if any.
  std::optional<NodeId> selected_node;
  /// Absent when no StartTransfer ever went on air.
  std::optional<TransferMetrics> metrics;
  MetricsInput metrics_input;
  std::vector<MediumEvent> log;
  std::vector<TraceLine> trace;
  std::vector<FilterRecord> filter_records;
  /// Segment advertisements each agent put on air, by agent index.
  std::vector<std::uint64_t> agent_segments;
  SimTime end_time = 0;
};

/// Runs one transfer until the medium drains. Throws LivelockGuard.
TransferOutcome simulate_transfer(const TransferSetup& setup, bool trace = false);

/// Fixed controller UUID used unless a scenario overrides it.
Uuid128 default_uuid_a();

enum class LossKind { Bernoulli, PerChannel };

/// Parsed scenario file. Lists (t, loss, seeds) form a sweep.
struct Scenario {
  std::string name = "scenario";
  std::string device_profile = "sim";
  PduKind kind = PduKind::LegacyNonConnectable;
  std::optional<ExtendedConfig> extended;
  std::size_t z = 12;
  Bytes payload;
  std::vector<SimTime> t_values;
  std::optional<std::uint32_t> repeats = 3;
  std::optional<SimTime> timeout;
  LossKind loss_kind = LossKind::Bernoulli;
  std::vector<double> loss_values{0.0};
  PerChannelLoss channel_loss;
  SimTime max_delay = 10;
  std::uint64_t event_budget = 5'000'000;
  ControllerParams controller;
  std::vector<Policy> policies;
  std::size_t agents = 1;
  std::optional<std::size_t> target;
  std::vector<std::uint64_t> seeds;
  Uuid128 uuid_a = default_uuid_a();
};

/// Reads an INI scenario. Relative payload_file paths resolve against the
/// scenario's directory. Throws ConfigError naming the offending key.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".");

/// Throws ConfigError naming the offending key.
void validate(const Scenario& scenario);

std::string ble_mode(const Scenario& scenario);

struct RunSpec {
  std::string run_id;
  SimTime interval = 0;
  double loss = 0.0;
  std::uint64_t seed = 0;
};

/// Cross product of t values, loss values and seeds, in file order.
std::vector<RunSpec> expand(const Scenario& scenario);

TransferSetup make_setup(const Scenario& scenario, const RunSpec& run);

struct RunResult {
  RunSpec spec;
  RunLabel label;
  TransferOutcome outcome;
  TransferMetrics metrics;  // zeros when the transfer never started
  bool payload_match = false;
};

RunResult run_one(const Scenario& scenario, const RunSpec& run, bool trace);

struct SweepOptions {
  std::filesystem::path out_dir = "out";
  bool trace = false;
  bool dump_pdus = false;
  bool require_complete = false;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepSummary {
  std::size_t runs = 0;
  std::size_t complete = 0;
  std::vector<std::string> incomplete;
};

/// Runs every RunSpec (in parallel), then writes metrics.csv, curves.csv,
/// transfers.csv and, on request, trace.log and pdus/<run_id>.hex in
/// scenario order. Throws SimulationFailure when a run errors, returns a
/// wrong payload, or, with require_complete, does not finish.
SweepSummary run_sweep(const Scenario& scenario, const SweepOptions& options);

}  // namespace blecc
