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
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "blecc/node.hpp"
#include "blecc/pdu.hpp"
#include "blecc/types.hpp"

namespace blecc {

/// One loss draw per receiver per advertisement.
struct BernoulliLoss {
  double p = 0.0;
};

/// Each advertisement goes out on channels 37, 38 and 39; a receiver gets it
/// if any copy survives, so the effective loss is p37 * p38 * p39.
struct PerChannelLoss {
  double p37 = 0.0;
  double p38 = 0.0;
  double p39 = 0.0;
};

using LossModel = std::variant<BernoulliLoss, PerChannelLoss>;

/// Probability that one receiver misses one advertisement.
double effective_loss(const LossModel& model);

/// Symmetric in-range relation. A default-constructed matrix puts every
/// node in range of every other node.
class RangeMatrix {
 public:
  RangeMatrix() = default;

  void set(NodeId a, NodeId b, bool in_range);
  bool in_range(NodeId a, NodeId b) const;

 private:
  // Pairs stored with the smaller id first; value false means out of range.
  std::vector<std::pair<std::pair<NodeId, NodeId>, bool>> overrides_;
};

struct MediumConfig {
  LossModel loss = BernoulliLoss{};
  /// Advertising delay, uniform integer milliseconds in [0, max_delay_ms].
  SimTime max_delay_ms = 10;
  RangeMatrix range;
  std::uint64_t seed = 1;
  /// run_until throws LivelockGuard after this many processed entries.
  std::uint64_t event_budget = 5'000'000;
};

/// Throws InvalidArgument for probabilities outside [0, 1] or a negative delay.
void validate(const MediumConfig& config);

struct MediumEvent {
  SimTime timestamp = 0;
  NodeId sender = 0;
  AdvertisingPdu pdu;
  std::vector<NodeId> delivered_to;
  std::vector<NodeId> dropped_for;
};

struct FilterVerdict {
  enum class Kind { Allow, Delay, Block, Flag };
  Kind kind = Kind::Allow;
  SimTime until = 0;  // Delay only
  std::string reason;

  static FilterVerdict allow() { return {}; }
  static FilterVerdict delay(SimTime until, std::string reason) { return {Kind::Delay, until, std::move(reason)}; }
  static FilterVerdict block(std::string reason) { return {Kind::Block, 0, std::move(reason)}; }
  static FilterVerdict flag(std::string reason) { return {Kind::Flag, 0, std::move(reason)}; }
};

/// Inspects advertisements of the senders it is attached to, in emission order.
class EmissionFilter {
 public:
  virtual ~EmissionFilter() = default;

  /// Decide on `event` without changing state.
  virtual FilterVerdict inspect(const MediumEvent& event) = 0;
  /// Called once the event actually goes on air.
  virtual void commit(const MediumEvent& event) = 0;
};

/// Countermeasure record: a flag, block or delay applied to one advertisement.
struct FilterRecord {
  SimTime time = 0;
  NodeId sender = 0;
  FilterVerdict::Kind kind = FilterVerdict::Kind::Allow;
  std::string reason;
};

/// Deterministic discrete-event broadcast medium.
///
/// Entries are processed in (time, node, insertion order). Loss and delay are
/// drawn from one mt19937_64 stream when an advertisement is scheduled, so a
/// given (config, seed, node behaviour) always yields the same event stream.
class Medium {
 public:
  explicit Medium(MediumConfig config, bool trace = false);

  NodeId add_node(std::unique_ptr<Node> node);
  Node& node(NodeId id);
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Attach a filter to the advertisements of `sender`.
  void attach_filter(NodeId sender, std::shared_ptr<EmissionFilter> filter);

  SimTime now() const noexcept { return now_; }

  /// Draws the delay and per-receiver loss for one advertisement and queues it.
  /// Throws InvalidArgument when base_time lies in the past.
  MediumEvent schedule_advertisement(NodeId sender, AdvertisingPdu pdu, SimTime base_time,
                                     std::uint32_t tag = 0);

  void schedule_timer(NodeId node, SimTime at, std::uint64_t tag);

  /// Processes entries up to and including `end_time`, or until the queue
  /// drains. Returns the advertisements that went on air during this call.
  std::vector<MediumEvent> run_until(std::optional<SimTime> end_time = std::nullopt);

  const std::vector<MediumEvent>& log() const noexcept { return log_; }
  const std::vector<FilterRecord>& filter_records() const noexcept { return filter_records_; }
  const Trace& trace() const noexcept { return trace_; }
  std::uint64_t processed() const noexcept { return processed_; }

 private:
  struct QueuedAdvert {
    MediumEvent event;
    std::uint32_t tag = 0;
    std::uint64_t generation = 0;
  };
  struct QueuedTimer {
    std::uint64_t tag = 0;
  };
  struct Entry {
    SimTime time = 0;
    NodeId node = 0;
    std::uint64_t seq = 0;
    std::variant<QueuedAdvert, QueuedTimer> what;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.node != b.node) return a.node > b.node;
      return a.seq > b.seq;
    }
  };

  void start_nodes();
  void apply(NodeId id, NodeActions actions);
  void process_advert(QueuedAdvert advert, std::vector<MediumEvent>& emitted);
  void push(SimTime time, NodeId node, std::variant<QueuedAdvert, QueuedTimer> what);
  double uniform01();

  MediumConfig config_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::vector<std::uint64_t> generations_;
  std::unordered_map<NodeId, std::vector<std::shared_ptr<EmissionFilter>>> filters_;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  std::vector<MediumEvent> log_;
  std::vector<FilterRecord> filter_records_;
  Trace trace_;
  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  bool started_ = false;
};

}  // namespace blecc
