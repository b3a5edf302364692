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

#include "blecc/medium.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "blecc/error.hpp"

namespace blecc {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::InvalidArgument, fmt::format("{} must lie in [0, 1], got {}", what, p));
  }
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i != 0) s += ',';
    s += std::to_string(ids[i]);
  }
  return s.empty() ? "none" : s;
}

const char* verdict_name(FilterVerdict::Kind kind) {
  switch (kind) {
    case FilterVerdict::Kind::Allow: return "cm_allow";
    case FilterVerdict::Kind::Delay: return "cm_delay";
    case FilterVerdict::Kind::Block: return "cm_block";
    case FilterVerdict::Kind::Flag: return "cm_flag";
  }
  return "cm";
}

}  // namespace

double effective_loss(const LossModel& model) {
  if (const auto* b = std::get_if<BernoulliLoss>(&model)) return b->p;
  const auto& c = std::get<PerChannelLoss>(model);
  return c.p37 * c.p38 * c.p39;
}

void RangeMatrix::set(NodeId a, NodeId b, bool in_range) {
  const auto key = std::minmax(a, b);
  auto it = std::find_if(overrides_.begin(), overrides_.end(),
                         [&](const auto& o) { return o.first == std::pair<NodeId, NodeId>(key); });
  if (it == overrides_.end()) {
    overrides_.emplace_back(std::pair<NodeId, NodeId>(key), in_range);
  } else {
    it->second = in_range;
  }
}

bool RangeMatrix::in_range(NodeId a, NodeId b) const {
  const auto key = std::minmax(a, b);
  for (const auto& o : overrides_) {
    if (o.first == std::pair<NodeId, NodeId>(key)) return o.second;
  }
  return true;
}

void validate(const MediumConfig& config) {
  if (const auto* b = std::get_if<BernoulliLoss>(&config.loss)) {
    check_probability(b->p, "loss p");
  } else {
    const auto& c = std::get<PerChannelLoss>(config.loss);
    check_probability(c.p37, "loss p37");
    check_probability(c.p38, "loss p38");
    check_probability(c.p39, "loss p39");
  }
  if (config.max_delay_ms < 0) throw Error(Errc::InvalidArgument, "max_delay_ms must be >= 0");
}

Medium::Medium(MediumConfig config, bool trace)
    : config_(std::move(config)), rng_(config_.seed), trace_(trace) {
  validate(config_);
}

NodeId Medium::add_node(std::unique_ptr<Node> node) {
  nodes_.push_back(std::move(node));
  generations_.push_back(0);
  return static_cast<NodeId>(nodes_.size() - 1);
}

Node& Medium::node(NodeId id) {
  if (id >= nodes_.size()) throw Error(Errc::InvalidArgument, "unknown node " + std::to_string(id));
  return *nodes_[id];
}

void Medium::attach_filter(NodeId sender, std::shared_ptr<EmissionFilter> filter) {
  filters_[sender].push_back(std::move(filter));
}

double Medium::uniform01() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void Medium::push(SimTime time, NodeId node, std::variant<QueuedAdvert, QueuedTimer> what) {
  queue_.push(Entry{time, node, seq_++, std::move(what)});
}

MediumEvent Medium::schedule_advertisement(NodeId sender, AdvertisingPdu pdu, SimTime base_time,
                                           std::uint32_t tag) {
  if (sender >= nodes_.size()) throw Error(Errc::InvalidArgument, "unknown sender " + std::to_string(sender));
  if (base_time < now_) {
    throw Error(Errc::InvalidArgument,
                fmt::format("advertisement base time {} is before the current time {}", base_time, now_));
  }
  const auto span = static_cast<std::uint64_t>(config_.max_delay_ms) + 1;
  const SimTime delay = static_cast<SimTime>(rng_() % span);

  MediumEvent event;
  event.timestamp = base_time + delay;
  event.sender = sender;
  event.pdu = std::move(pdu);
  for (NodeId r = 0; r < nodes_.size(); ++r) {
    if (r == sender || !config_.range.in_range(sender, r)) continue;
    bool delivered = false;
    if (const auto* b = std::get_if<BernoulliLoss>(&config_.loss)) {
      delivered = uniform01() >= b->p;
    } else {
      const auto& c = std::get<PerChannelLoss>(config_.loss);
      for (double p : {c.p37, c.p38, c.p39}) {
        // Always draw all three so the stream does not depend on outcomes.
        if (uniform01() >= p) delivered = true;
      }
    }
    (delivered ? event.delivered_to : event.dropped_for).push_back(r);
  }
  push(event.timestamp, sender, QueuedAdvert{event, tag, generations_[sender]});
  return event;
}

void Medium::schedule_timer(NodeId node, SimTime at, std::uint64_t tag) {
  if (node >= nodes_.size()) throw Error(Errc::InvalidArgument, "unknown node " + std::to_string(node));
  push(std::max(at, now_), node, QueuedTimer{tag});
}

void Medium::apply(NodeId id, NodeActions actions) {
  if (actions.cancel_pending) ++generations_[id];
  for (auto& t : actions.timers) schedule_timer(id, t.at, t.tag);
  for (auto& a : actions.adverts) schedule_advertisement(id, std::move(a.pdu), std::max(a.base_time, now_), a.tag);
}

void Medium::start_nodes() {
  if (nodes_.empty()) throw Error(Errc::InvalidArgument, "medium has no nodes");
  started_ = true;
  for (NodeId id = 0; id < nodes_.size(); ++id) apply(id, nodes_[id]->on_start(now_, trace_));
}

void Medium::process_advert(QueuedAdvert advert, std::vector<MediumEvent>& emitted) {
  MediumEvent& event = advert.event;
  const NodeId sender = event.sender;
  if (advert.generation != generations_[sender]) {
    trace_.add(TraceLine{now_, "medium", "", fmt::format("cancelled:{}", sender), ""});
    return;
  }
  event.timestamp = now_;

  bool blocked = false;
  auto filters = filters_.find(sender);
  if (filters != filters_.end()) {
    for (auto& f : filters->second) {
      FilterVerdict v = f->inspect(event);
      if (v.kind == FilterVerdict::Kind::Allow) continue;
      filter_records_.push_back(FilterRecord{now_, sender, v.kind, v.reason});
      trace_.add(TraceLine{now_, "medium", "", fmt::format("{}:{}", verdict_name(v.kind), sender), v.reason});
      if (v.kind == FilterVerdict::Kind::Delay) {
        const SimTime until = std::max(v.until, now_);
        push(until, sender, std::move(advert));
        return;
      }
      if (v.kind == FilterVerdict::Kind::Block) {
        blocked = true;
        break;
      }
    }
  }

  if (!blocked) {
    if (filters != filters_.end()) {
      for (auto& f : filters->second) f->commit(event);
    }
    log_.push_back(event);
    emitted.push_back(event);
    if (trace_.enabled()) {
      trace_.add(TraceLine{now_, "medium", "", fmt::format("adv:{}", sender),
                           fmt::format("delivered={} dropped={}", join_ids(event.delivered_to),
                                       join_ids(event.dropped_for))});
    }
    for (NodeId r : event.delivered_to) {
      apply(r, nodes_[r]->on_advertisement(now_, sender, event.pdu, trace_));
    }
  }
  apply(sender, nodes_[sender]->on_transmitted(now_, advert.tag, blocked, trace_));
}

std::vector<MediumEvent> Medium::run_until(std::optional<SimTime> end_time) {
  std::vector<MediumEvent> emitted;
  if (!started_) start_nodes();
  while (!queue_.empty()) {
    if (end_time && queue_.top().time > *end_time) break;
    if (++processed_ > config_.event_budget) {
      throw Error(Errc::LivelockGuard,
                  fmt::format("event budget of {} exhausted at t={}", config_.event_budget, now_));
    }
    Entry entry = queue_.top();
    queue_.pop();
    now_ = entry.time;
    if (auto* timer = std::get_if<QueuedTimer>(&entry.what)) {
      apply(entry.node, nodes_[entry.node]->on_timer(now_, timer->tag, trace_));
    } else {
      process_advert(std::move(std::get<QueuedAdvert>(entry.what)), emitted);
    }
  }
  if (end_time && *end_time > now_) now_ = *end_time;
  return emitted;
}

}  // namespace blecc
