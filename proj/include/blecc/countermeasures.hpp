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
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blecc/medium.hpp"
#include "blecc/pdu.hpp"
#include "blecc/types.hpp"

namespace blecc {

/// Rule behind SemanticCheck. `would_flag` must not change state; `observe`
/// is called for every advertisement that goes on air.
class ContentRule {
 public:
  virtual ~ContentRule() = default;

  virtual std::string name() const = 0;
  virtual bool would_flag(const MediumEvent& event) const = 0;
  virtual void observe(const MediumEvent& event) = 0;
  virtual std::unique_ptr<ContentRule> clone() const = 0;
};

/// Shannon entropy of the byte histogram, in bits.
double byte_entropy(ByteView data);

/// Flags a run of `streak` consecutive advertisements whose content differs
/// from the previous one and whose service data has byte entropy above
/// `threshold_bits`. One flag per run.
class EntropyStreakRule final : public ContentRule {
 public:
  explicit EntropyStreakRule(double threshold_bits = 2.5, std::uint32_t streak = 5);

  std::string name() const override;
  bool would_flag(const MediumEvent& event) const override;
  void observe(const MediumEvent& event) override;
  std::unique_ptr<ContentRule> clone() const override;

 private:
  std::uint32_t next_run(const MediumEvent& event) const;

  double threshold_;
  std::uint32_t streak_;
  std::optional<Bytes> last_;
  std::uint32_t run_ = 0;
};

namespace policy {

struct RateLimit {
  SimTime min_interval = 0;
};

struct ChangeFrequencyLimit {
  std::uint32_t max_changes = 0;
  SimTime window = 0;
};

struct SemanticCheck {
  std::shared_ptr<const ContentRule> rule;
};

struct RestrictedVocabulary {
  std::vector<Bytes> allowed;
};

}  // namespace policy

using Policy =
    std::variant<policy::RateLimit, policy::ChangeFrequencyLimit, policy::SemanticCheck, policy::RestrictedVocabulary>;

/// Throws InvalidArgument for non-positive parameters or an empty vocabulary.
void validate(const Policy& policy);

std::string describe(const Policy& policy);

/// Per-sender enforcement state for one policy, attachable to a Medium.
///
/// RateLimit delays, ChangeFrequencyLimit and RestrictedVocabulary block,
/// SemanticCheck only flags.
class PolicyFilter final : public EmissionFilter {
 public:
  explicit PolicyFilter(Policy policy);

  FilterVerdict inspect(const MediumEvent& event) override;
  void commit(const MediumEvent& event) override;

  const Policy& policy() const noexcept { return policy_; }

 private:
  Policy policy_;
  std::unique_ptr<ContentRule> rule_;
  std::optional<SimTime> last_emission_;
  std::optional<Bytes> last_content_;
  std::deque<SimTime> changes_;
};

/// Inspects `event` and, unless it is delayed or blocked, records it as sent.
FilterVerdict apply_policy(PolicyFilter& filter, const MediumEvent& event);

/// Symbols needed for `payload_length` bytes over an alphabet of `alphabet`
/// values: ceil(8 * len / log2(alphabet)).
std::size_t vocab_symbol_count(std::size_t payload_length, std::size_t alphabet);

/// Encodes `payload` as a sequence of allowed service-data values (exact
/// base-|V| conversion, most significant digit first). Throws
/// InsufficientAlphabet below two values, InvalidArgument on duplicates.
std::vector<Bytes> vocab_encode(ByteView payload, const std::vector<Bytes>& allowed);

/// Inverse of vocab_encode. Throws InvalidArgument on unknown values or a
/// symbol count that does not match `payload_length`.
Bytes vocab_decode(const std::vector<Bytes>& values, const std::vector<Bytes>& allowed, std::size_t payload_length);

/// A sender emitting a fixed list of service-data values, chained at
/// interval t, and one receiver. Measures raw channel throughput.
struct StreamConfig {
  std::vector<Bytes> values;
  std::size_t payload_length = 0;  // bytes the values stand for
  SimTime interval = 1000;
  PduKind kind = PduKind::LegacyNonConnectable;
  std::optional<ExtendedConfig> extended;
  Uuid128 uuid{};
  MediumConfig medium;
  std::vector<Policy> policies;  // attached to the sender
};

struct StreamResult {
  std::size_t emitted = 0;
  std::size_t blocked = 0;
  std::size_t received = 0;
  SimTime first_base = 0;
  SimTime last_receipt = 0;
  /// payload_length over (last receipt - first emission base), bytes/s.
  double throughput = 0.0;
  std::vector<Bytes> received_values;
  std::vector<FilterRecord> filter_records;
};

StreamResult run_stream(const StreamConfig& config);

}  // namespace blecc
