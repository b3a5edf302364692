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

#include "blecc/countermeasures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "blecc/error.hpp"

namespace blecc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Bytes service_data_or_raw(const AdvertisingPdu& pdu) {
  try {
    return service_data_of(pdu).data;
  } catch (const Error&) {
    return pdu.adv_data;
  }
}

// In-place division of a big-endian number by a small divisor; returns the remainder.
std::uint64_t divide(Bytes& number, std::uint64_t divisor) {
  std::uint64_t rem = 0;
  for (auto& b : number) {
    const std::uint64_t cur = (rem << 8) | b;
    b = static_cast<std::uint8_t>(cur / divisor);
    rem = cur % divisor;
  }
  return rem;
}

bool is_zero(const Bytes& number) {
  return std::all_of(number.begin(), number.end(), [](std::uint8_t b) { return b == 0; });
}

void check_alphabet(const std::vector<Bytes>& allowed) {
  if (allowed.size() < 2) {
    throw Error(Errc::InsufficientAlphabet, fmt::format("need at least 2 allowed values, got {}", allowed.size()));
  }
  if (allowed.size() > (1ULL << 32)) throw Error(Errc::InvalidArgument, "alphabet larger than 2^32");
  std::vector<Bytes> sorted = allowed;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(Errc::InvalidArgument, "allowed values must be distinct");
  }
}

class StreamSender final : public Node {
 public:
  StreamSender(const StreamConfig& cfg, StreamResult& result) : cfg_(cfg), result_(result) {}

  const std::string& name() const override { return name_; }

  NodeActions on_start(SimTime now, Trace&) override {
    result_.first_base = now;
    return next(now);
  }
  NodeActions on_advertisement(SimTime, NodeId, const AdvertisingPdu&, Trace&) override { return {}; }
  NodeActions on_timer(SimTime, std::uint64_t, Trace&) override { return {}; }
  NodeActions on_transmitted(SimTime now, std::uint32_t, bool blocked, Trace&) override {
    ++(blocked ? result_.blocked : result_.emitted);
    ++index_;
    return next(now + cfg_.interval);
  }

 private:
  NodeActions next(SimTime base) {
    NodeActions a;
    if (index_ < cfg_.values.size()) {
      a.adverts.push_back(
          AdvertRequest{build_pdu(cfg_.kind, DeviceAddress{}, cfg_.uuid, cfg_.values[index_], cfg_.extended), base, 0});
    }
    return a;
  }

  const StreamConfig& cfg_;
  StreamResult& result_;
  std::size_t index_ = 0;
  std::string name_ = "sender";
};

class StreamReceiver final : public Node {
 public:
  StreamReceiver(const StreamConfig& cfg, StreamResult& result) : cfg_(cfg), result_(result) {}

  const std::string& name() const override { return name_; }
  NodeActions on_start(SimTime, Trace&) override { return {}; }
  NodeActions on_advertisement(SimTime now, NodeId, const AdvertisingPdu& pdu, Trace&) override {
    const ServiceDataBlock block = service_data_of(pdu);
    if (block.uuid == cfg_.uuid) {
      ++result_.received;
      result_.last_receipt = now;
      result_.received_values.push_back(block.data);
    }
    return {};
  }
  NodeActions on_timer(SimTime, std::uint64_t, Trace&) override { return {}; }
  NodeActions on_transmitted(SimTime, std::uint32_t, bool, Trace&) override { return {}; }

 private:
  const StreamConfig& cfg_;
  StreamResult& result_;
  std::string name_ = "receiver";
};

}  // namespace

double byte_entropy(ByteView data) {
  if (data.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (auto b : data) ++counts[b];
  double h = 0.0;
  const auto total = static_cast<double>(data.size());
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

EntropyStreakRule::EntropyStreakRule(double threshold_bits, std::uint32_t streak)
    : threshold_(threshold_bits), streak_(streak) {
  if (streak_ == 0) throw Error(Errc::InvalidArgument, "entropy streak length must be positive");
}

std::string EntropyStreakRule::name() const {
  return fmt::format("entropy>{:.2f}x{}", threshold_, streak_);
}

std::uint32_t EntropyStreakRule::next_run(const MediumEvent& event) const {
  const bool changed = !last_ || *last_ != event.pdu.adv_data;
  const bool dense = byte_entropy(service_data_or_raw(event.pdu)) > threshold_;
  return changed && dense ? run_ + 1 : 0;
}

bool EntropyStreakRule::would_flag(const MediumEvent& event) const { return next_run(event) == streak_; }

void EntropyStreakRule::observe(const MediumEvent& event) {
  run_ = next_run(event);
  last_ = event.pdu.adv_data;
}

std::unique_ptr<ContentRule> EntropyStreakRule::clone() const { return std::make_unique<EntropyStreakRule>(*this); }

void validate(const Policy& policy) {
  std::visit(Overloaded{
                 [](const policy::RateLimit& p) {
                   if (p.min_interval <= 0) throw Error(Errc::InvalidArgument, "rate limit interval must be > 0");
                 },
                 [](const policy::ChangeFrequencyLimit& p) {
                   if (p.max_changes == 0 || p.window <= 0) {
                     throw Error(Errc::InvalidArgument, "change limit and window must be > 0");
                   }
                 },
                 [](const policy::SemanticCheck& p) {
                   if (!p.rule) throw Error(Errc::InvalidArgument, "semantic check needs a rule");
                 },
                 [](const policy::RestrictedVocabulary& p) {
                   if (p.allowed.empty()) throw Error(Errc::InvalidArgument, "vocabulary must not be empty");
                 },
             },
             policy);
}

std::string describe(const Policy& policy) {
  return std::visit(
      Overloaded{
          [](const policy::RateLimit& p) { return fmt::format("rate_limit({}ms)", p.min_interval); },
          [](const policy::ChangeFrequencyLimit& p) {
            return fmt::format("change_limit({}/{}ms)", p.max_changes, p.window);
          },
          [](const policy::SemanticCheck& p) { return "semantic(" + (p.rule ? p.rule->name() : "none") + ")"; },
          [](const policy::RestrictedVocabulary& p) { return fmt::format("vocabulary({})", p.allowed.size()); },
      },
      policy);
}

PolicyFilter::PolicyFilter(Policy policy) : policy_(std::move(policy)) {
  validate(policy_);
  if (const auto* semantic = std::get_if<policy::SemanticCheck>(&policy_)) rule_ = semantic->rule->clone();
}

FilterVerdict PolicyFilter::inspect(const MediumEvent& event) {
  const SimTime now = event.timestamp;
  return std::visit(
      Overloaded{
          [&](const policy::RateLimit& p) {
            if (last_emission_ && now < *last_emission_ + p.min_interval) {
              return FilterVerdict::delay(*last_emission_ + p.min_interval, describe(policy_));
            }
            return FilterVerdict::allow();
          },
          [&](const policy::ChangeFrequencyLimit& p) {
            if (!last_content_ || *last_content_ == event.pdu.adv_data) return FilterVerdict::allow();
            const auto recent = std::count_if(changes_.begin(), changes_.end(),
                                              [&](SimTime t) { return t > now - p.window; });
            if (static_cast<std::uint32_t>(recent) >= p.max_changes) return FilterVerdict::block(describe(policy_));
            return FilterVerdict::allow();
          },
          [&](const policy::SemanticCheck&) {
            return rule_->would_flag(event) ? FilterVerdict::flag(rule_->name()) : FilterVerdict::allow();
          },
          [&](const policy::RestrictedVocabulary& p) {
            const Bytes data = service_data_or_raw(event.pdu);
            if (std::find(p.allowed.begin(), p.allowed.end(), data) == p.allowed.end()) {
              return FilterVerdict::block(describe(policy_));
            }
            return FilterVerdict::allow();
          },
      },
      policy_);
}

void PolicyFilter::commit(const MediumEvent& event) {
  const SimTime now = event.timestamp;
  last_emission_ = now;
  if (const auto* p = std::get_if<policy::ChangeFrequencyLimit>(&policy_)) {
    if (last_content_ && *last_content_ != event.pdu.adv_data) changes_.push_back(now);
    while (!changes_.empty() && changes_.front() <= now - p->window) changes_.pop_front();
  }
  last_content_ = event.pdu.adv_data;
  if (rule_) rule_->observe(event);
}

FilterVerdict apply_policy(PolicyFilter& filter, const MediumEvent& event) {
  FilterVerdict v = filter.inspect(event);
  if (v.kind == FilterVerdict::Kind::Allow || v.kind == FilterVerdict::Kind::Flag) filter.commit(event);
  return v;
}

std::size_t vocab_symbol_count(std::size_t payload_length, std::size_t alphabet) {
  if (alphabet < 2) throw Error(Errc::InsufficientAlphabet, "alphabet needs at least 2 values");
  // Digits of 256^len - 1 in base |V|: the least k with |V|^k >= 256^len.
  Bytes number(payload_length, 0xFF);
  std::size_t k = 0;
  while (!is_zero(number)) {
    divide(number, alphabet);
    ++k;
  }
  return k;
}

std::vector<Bytes> vocab_encode(ByteView payload, const std::vector<Bytes>& allowed) {
  check_alphabet(allowed);
  const std::size_t k = vocab_symbol_count(payload.size(), allowed.size());
  Bytes number(payload.begin(), payload.end());
  std::vector<Bytes> out(k);
  for (std::size_t i = k; i-- > 0;) out[i] = allowed[divide(number, allowed.size())];
  return out;
}

Bytes vocab_decode(const std::vector<Bytes>& values, const std::vector<Bytes>& allowed, std::size_t payload_length) {
  check_alphabet(allowed);
  const std::size_t k = vocab_symbol_count(payload_length, allowed.size());
  if (values.size() != k) {
    throw Error(Errc::InvalidArgument,
                fmt::format("{} bytes need {} symbols, got {}", payload_length, k, values.size()));
  }
  std::map<Bytes, std::uint64_t> index;
  for (std::size_t i = 0; i < allowed.size(); ++i) index.emplace(allowed[i], i);
  Bytes number(payload_length, 0);
  const std::uint64_t base = allowed.size();
  for (const auto& v : values) {
    auto it = index.find(v);
    if (it == index.end()) throw Error(Errc::InvalidArgument, "value " + to_hex(v) + " is not in the vocabulary");
    std::uint64_t carry = it->second;
    for (auto b = number.rbegin(); b != number.rend(); ++b) {
      const std::uint64_t cur = static_cast<std::uint64_t>(*b) * base + carry;
      *b = static_cast<std::uint8_t>(cur);
      carry = cur >> 8;
    }
    if (carry != 0) throw Error(Errc::InvalidArgument, "symbol sequence exceeds the payload length");
  }
  return number;
}

StreamResult run_stream(const StreamConfig& config) {
  StreamResult result;
  Medium medium(config.medium);
  const NodeId sender = medium.add_node(std::make_unique<StreamSender>(config, result));
  medium.add_node(std::make_unique<StreamReceiver>(config, result));
  for (const auto& p : config.policies) medium.attach_filter(sender, std::make_shared<PolicyFilter>(p));
  medium.run_until();
  result.filter_records = medium.filter_records();
  const SimTime span = result.last_receipt - result.first_base;
  if (result.received > 0 && span > 0) {
    result.throughput = static_cast<double>(config.payload_length) * 1000.0 / static_cast<double>(span);
  }
  return result;
}

}  // namespace blecc
