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

#include "blecc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "blecc/agent.hpp"
#include "blecc/error.hpp"

namespace blecc {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(Errc::ConfigError, fmt::format("{}: {}", key, what));
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_int(const std::string& key, const std::string& text) {
  T value{};
  const auto s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    config_error(key, fmt::format("expected an integer, got '{}'", text));
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    config_error(key, fmt::format("expected a number, got '{}'", text));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  config_error(key, fmt::format("expected true or false, got '{}'", text));
}

bool is_inf(const std::string& text) {
  const auto s = trim(text);
  return s == "inf" || s == "infinity" || s == "∞";
}

Uuid128 parse_uuid(const std::string& key, const std::string& text) {
  std::string hex;
  for (char c : text) {
    if (c != '-' && c != ' ') hex += c;
  }
  Bytes b;
  try {
    b = from_hex(hex);
  } catch (const Error&) {
    config_error(key, "not a hex UUID");
  }
  if (b.size() != 16) config_error(key, "a UUID has 16 bytes");
  Uuid128 u{};
  std::copy(b.begin(), b.end(), u.begin());
  return u;
}

// Walks one INI section, rejecting keys the caller does not know.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    if (tree_ == nullptr) return std::nullopt;
    auto child = tree_->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return trim(child->data());
  }

  std::string key(const std::string& k) const { return name_ + "." + k; }

  void reject_unknown() const {
    if (tree_ == nullptr) return;
    for (const auto& [k, v] : *tree_) {
      if (!used_.contains(k)) config_error(key(k), "unknown key");
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

Bytes random_payload(std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bytes out(length);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
  return out;
}

Policy parse_policy(const std::string& name, const pt::ptree& tree) {
  Section s(&tree, name);
  const auto type = s.get("type");
  if (!type) config_error(s.key("type"), "missing");
  Policy policy;
  if (*type == "rate_limit") {
    const auto v = s.get("min_interval_ms");
    if (!v) config_error(s.key("min_interval_ms"), "missing");
    policy = policy::RateLimit{parse_int<SimTime>(s.key("min_interval_ms"), *v)};
  } else if (*type == "change_limit") {
    const auto m = s.get("max_changes");
    const auto w = s.get("window_ms");
    if (!m) config_error(s.key("max_changes"), "missing");
    if (!w) config_error(s.key("window_ms"), "missing");
    policy = policy::ChangeFrequencyLimit{parse_int<std::uint32_t>(s.key("max_changes"), *m),
                                          parse_int<SimTime>(s.key("window_ms"), *w)};
  } else if (*type == "semantic") {
    double threshold = 2.5;
    std::uint32_t streak = 5;
    if (auto v = s.get("threshold_bits")) threshold = parse_double(s.key("threshold_bits"), *v);
    if (auto v = s.get("streak")) streak = parse_int<std::uint32_t>(s.key("streak"), *v);
    if (streak == 0) config_error(s.key("streak"), "must be positive");
    policy = policy::SemanticCheck{std::make_shared<EntropyStreakRule>(threshold, streak)};
  } else if (*type == "vocabulary") {
    const auto v = s.get("values");
    if (!v) config_error(s.key("values"), "missing");
    policy::RestrictedVocabulary vocab;
    for (const auto& item : split_list(*v)) {
      try {
        vocab.allowed.push_back(from_hex(item));
      } catch (const Error&) {
        config_error(s.key("values"), fmt::format("'{}' is not hex", item));
      }
    }
    policy = std::move(vocab);
  } else {
    config_error(s.key("type"), fmt::format("unknown policy '{}'", *type));
  }
  s.reject_unknown();
  try {
    validate(policy);
  } catch (const Error& e) {
    config_error(name, e.what());
  }
  return policy;
}

std::string format_loss(double p) {
  std::string s = fmt::format("{}", p);
  return s;
}

}  // namespace

Uuid128 default_uuid_a() {
  return Uuid128{0x6e, 0x40, 0x00, 0x01, 0xb5, 0xa3, 0xf3, 0x93, 0xe0, 0xa9, 0xe5, 0x0e, 0x24, 0xdc, 0xca, 0x9e};
}

TransferOutcome simulate_transfer(const TransferSetup& setup, bool trace) {
  if (setup.agents == 0) throw Error(Errc::InvalidArgument, "at least one agent is needed");
  std::mt19937_64 ids(setup.identity_seed);
  auto fill = [&ids](auto& bytes) {
    for (auto& b : bytes) b = static_cast<std::uint8_t>(ids() >> 56);
  };
  auto address = [&]() {
    DeviceAddress a{};
    fill(a);
    a[5] |= 0xC0;  // random static
    return a;
  };

  Medium medium(setup.medium, trace);

  ControllerParams params = setup.controller;
  params.interval = setup.interval;
  params.max_delay = setup.medium.max_delay_ms;
  params.uuid_a = setup.uuid_a;
  params.expected_repeats = setup.repeats;
  params.expected_timeout = setup.timeout;

  std::vector<AgentConfig> configs(setup.agents);
  for (auto& c : configs) {
    fill(c.id.bytes);
    do {
      fill(c.uuid_v);
    } while (c.uuid_v == setup.uuid_a);
    c.uuid_a = setup.uuid_a;
    c.payload = setup.payload;
    c.z = setup.z;
    c.repeats = setup.repeats;
    c.timeout = setup.timeout;
  }
  if (setup.target) {
    if (*setup.target >= setup.agents) throw Error(Errc::InvalidArgument, "target index out of range");
    params.target = configs[*setup.target].id;
  }

  auto ctrl = std::make_unique<ControllerNode>("controller", params,
                                               RadioProfile{setup.kind, setup.extended, address()});
  const ControllerNode* ctrl_view = ctrl.get();
  const NodeId ctrl_id = medium.add_node(std::move(ctrl));

  std::vector<const AgentNode*> agents;
  for (std::size_t i = 0; i < setup.agents; ++i) {
    auto node = std::make_unique<AgentNode>(fmt::format("agent{}", i), configs[i],
                                            RadioProfile{setup.kind, setup.extended, address()});
    agents.push_back(node.get());
    const NodeId id = medium.add_node(std::move(node));
    for (const auto& p : setup.policies) medium.attach_filter(id, std::make_shared<PolicyFilter>(p));
  }

  medium.run_until();

  TransferOutcome out;
  const ControllerState& st = ctrl_view->state();
  out.phase = st.phase;
  out.complete = st.phase == ControllerPhase::Done;
  if (out.complete) out.received = st.assembled;
  out.recovery_rounds = st.recovery_rounds;
  out.segments = segment_count(setup.payload.size(), setup.z);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.agent_segments.push_back(agents[i]->state().emitted_segments);
    if (st.selected && agents[i]->config().id == *st.selected) out.selected_node = static_cast<NodeId>(i + 1);
  }
  out.metrics_input = MetricsInput{ctrl_id,
                                   out.selected_node.value_or(1),
                                   setup.uuid_a,
                                   setup.payload.size(),
                                   out.segments,
                                   setup.z,
                                   setup.repeats,
                                   setup.interval};
  try {
    out.metrics = compute_metrics(medium.log(), out.metrics_input);
  } catch (const Error& e) {
    if (e.code() != Errc::IncompleteLog) throw;
  }
  out.log = medium.log();
  out.trace = medium.trace().lines();
  out.filter_records = medium.filter_records();
  out.end_time = medium.now();
  return out;
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, fmt::format("line {}: {}", e.line(), e.message()));
  }

  for (const auto& [name, child] : tree) {
    if (name != "scenario" && name != "medium" && name != "controller" && name.rfind("policy", 0) != 0) {
      config_error(name, "unknown section");
    }
  }

  Scenario sc;
  auto section = [&tree](const std::string& name) {
    auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    return Section(child ? &*child : nullptr, name);
  };

  Section s = section("scenario");
  if (auto v = s.get("name")) sc.name = *v;
  if (auto v = s.get("device_profile")) sc.device_profile = *v;
  if (auto v = s.get("ble_mode")) {
    if (*v == "legacy") {
      sc.kind = PduKind::LegacyNonConnectable;
    } else if (*v == "extended") {
      sc.kind = PduKind::ExtendedNonConnectable;
    } else {
      config_error(s.key("ble_mode"), fmt::format("expected legacy or extended, got '{}'", *v));
    }
  }
  const auto madl = s.get("madl");
  if (sc.kind == PduKind::ExtendedNonConnectable) {
    sc.extended = ExtendedConfig{madl ? parse_int<std::size_t>(s.key("madl"), *madl) : kMaxMadl};
  } else if (madl) {
    config_error(s.key("madl"), "only applies to ble_mode = extended");
  }
  if (auto v = s.get("z")) {
    sc.z = parse_int<std::size_t>(s.key("z"), *v);
  } else {
    config_error(s.key("z"), "missing");
  }

  const auto file = s.get("payload_file");
  const auto length = s.get("payload_length");
  const auto pseed = s.get("payload_seed");
  if (file && length) config_error(s.key("payload_file"), "conflicts with payload_length");
  if (file) {
    const auto path = base_dir / *file;
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error(s.key("payload_file"), fmt::format("cannot read '{}'", path.string()));
    sc.payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else if (length) {
    const auto seed = pseed ? parse_int<std::uint64_t>(s.key("payload_seed"), *pseed) : 0;
    sc.payload = random_payload(parse_int<std::size_t>(s.key("payload_length"), *length), seed);
  } else {
    config_error(s.key("payload_length"), "missing (or give payload_file)");
  }

  if (auto v = s.get("t_ms")) {
    for (const auto& item : split_list(*v)) sc.t_values.push_back(parse_int<SimTime>(s.key("t_ms"), item));
  } else {
    config_error(s.key("t_ms"), "missing");
  }
  if (auto v = s.get("R")) {
    sc.repeats = is_inf(*v) ? std::nullopt : std::optional(parse_int<std::uint32_t>(s.key("R"), *v));
  }
  if (auto v = s.get("T_ms")) sc.timeout = parse_int<SimTime>(s.key("T_ms"), *v);
  if (auto v = s.get("seeds")) {
    for (const auto& item : split_list(*v)) sc.seeds.push_back(parse_int<std::uint64_t>(s.key("seeds"), item));
  }
  if (auto v = s.get("agents")) sc.agents = parse_int<std::size_t>(s.key("agents"), *v);
  if (auto v = s.get("target")) sc.target = parse_int<std::size_t>(s.key("target"), *v);
  if (auto v = s.get("uuid_a")) sc.uuid_a = parse_uuid(s.key("uuid_a"), *v);
  s.reject_unknown();

  Section m = section("medium");
  if (auto v = m.get("loss")) {
    if (*v == "bernoulli") {
      sc.loss_kind = LossKind::Bernoulli;
    } else if (*v == "per_channel") {
      sc.loss_kind = LossKind::PerChannel;
    } else {
      config_error(m.key("loss"), fmt::format("expected bernoulli or per_channel, got '{}'", *v));
    }
  }
  if (auto v = m.get("loss_p")) {
    if (sc.loss_kind == LossKind::PerChannel) config_error(m.key("loss_p"), "use p37/p38/p39 with per_channel");
    sc.loss_values.clear();
    for (const auto& item : split_list(*v)) sc.loss_values.push_back(parse_double(m.key("loss_p"), item));
  }
  for (auto [k, field] : {std::pair{"p37", &PerChannelLoss::p37}, std::pair{"p38", &PerChannelLoss::p38},
                          std::pair{"p39", &PerChannelLoss::p39}}) {
    if (auto v = m.get(k)) {
      if (sc.loss_kind != LossKind::PerChannel) config_error(m.key(k), "needs loss = per_channel");
      sc.channel_loss.*field = parse_double(m.key(k), *v);
    }
  }
  if (sc.loss_kind == LossKind::PerChannel) sc.loss_values = {effective_loss(sc.channel_loss)};
  if (auto v = m.get("max_delay_ms")) sc.max_delay = parse_int<SimTime>(m.key("max_delay_ms"), *v);
  if (auto v = m.get("event_budget")) sc.event_budget = parse_int<std::uint64_t>(m.key("event_budget"), *v);
  m.reject_unknown();

  Section c = section("controller");
  auto& cp = sc.controller;
  if (auto v = c.get("recovery_round_cap")) {
    cp.recovery_round_cap =
        is_inf(*v) ? std::nullopt : std::optional(parse_int<std::uint32_t>(c.key("recovery_round_cap"), *v));
  }
  if (auto v = c.get("mode_switch_ms")) cp.mode_switch_latency = parse_int<SimTime>(c.key("mode_switch_ms"), *v);
  if (auto v = c.get("command_gap_ms")) cp.command_gap = parse_int<SimTime>(c.key("command_gap_ms"), *v);
  if (auto v = c.get("discovery_timeout_ms")) {
    cp.discovery_timeout = parse_int<SimTime>(c.key("discovery_timeout_ms"), *v);
  }
  if (auto v = c.get("quiescence_ms")) cp.quiescence = parse_int<SimTime>(c.key("quiescence_ms"), *v);
  if (auto v = c.get("stop_when_complete")) cp.stop_when_complete = parse_bool(c.key("stop_when_complete"), *v);
  if (auto v = c.get("max_select_attempts")) {
    cp.max_select_attempts = parse_int<std::uint32_t>(c.key("max_select_attempts"), *v);
  }
  if (auto v = c.get("max_start_attempts")) {
    cp.max_start_attempts = parse_int<std::uint32_t>(c.key("max_start_attempts"), *v);
  }
  c.reject_unknown();

  for (const auto& [name, child] : tree) {
    if (name.rfind("policy", 0) == 0) sc.policies.push_back(parse_policy(name, child));
  }

  validate(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, fmt::format("scenario: cannot open '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str(), path.parent_path());
  return sc;
}

void validate(const Scenario& sc) {
  if (sc.name.empty()) config_error("scenario.name", "must not be empty");
  if (sc.name.find(',') != std::string::npos) config_error("scenario.name", "must not contain ','");
  if (sc.extended) {
    try {
      validate(*sc.extended);
    } catch (const Error& e) {
      config_error("scenario.madl", e.what());
    }
  }
  if (sc.z == 0) config_error("scenario.z", "must be at least 1");
  const std::size_t zmax = max_service_data(sc.kind, sc.extended) - 1;
  if (sc.z > zmax) {
    config_error("scenario.z", fmt::format("{} segments hold at most {} bytes, got {}",
                                           sc.kind == PduKind::LegacyNonConnectable ? "legacy" : "extended", zmax,
                                           sc.z));
  }
  if (sc.payload.size() > 256 * part_capacity(sc.z)) {
    config_error("scenario.payload_length", "payload needs more than 256 transfer parts");
  }
  if (sc.payload.size() > 0xFFFFFFFFULL) config_error("scenario.payload_length", "payload above 4 GiB");
  if (sc.t_values.empty()) config_error("scenario.t_ms", "needs at least one value");
  for (SimTime t : sc.t_values) {
    if (t <= 0 || t > 0xFFFF) config_error("scenario.t_ms", fmt::format("{} is outside 1..65535", t));
  }
  if (sc.repeats && *sc.repeats == 0) config_error("scenario.R", "must be at least 1 or inf");
  if (sc.timeout && *sc.timeout <= 0) config_error("scenario.T_ms", "must be positive");
  if (!sc.repeats && !sc.timeout && !sc.controller.stop_when_complete) {
    config_error("scenario.R", "R = inf needs T_ms or controller.stop_when_complete");
  }
  if (sc.seeds.empty()) config_error("scenario.seeds", "needs at least one seed");
  if (sc.agents == 0) config_error("scenario.agents", "must be at least 1");
  if (sc.target && *sc.target >= sc.agents) {
    config_error("scenario.target", fmt::format("index {} but only {} agents", *sc.target, sc.agents));
  }
  if (sc.uuid_a == Uuid128{}) config_error("scenario.uuid_a", "must not be all zero");
  if (sc.loss_values.empty()) config_error("medium.loss_p", "needs at least one value");
  for (double p : sc.loss_values) {
    if (!(p >= 0.0 && p <= 1.0)) config_error("medium.loss_p", fmt::format("{} is outside [0, 1]", p));
  }
  for (auto [k, p] : {std::pair{"medium.p37", sc.channel_loss.p37}, std::pair{"medium.p38", sc.channel_loss.p38},
                      std::pair{"medium.p39", sc.channel_loss.p39}}) {
    if (!(p >= 0.0 && p <= 1.0)) config_error(k, fmt::format("{} is outside [0, 1]", p));
  }
  if (sc.max_delay < 0) config_error("medium.max_delay_ms", "must be >= 0");
  if (sc.event_budget == 0) config_error("medium.event_budget", "must be positive");
  const auto& cp = sc.controller;
  if (cp.mode_switch_latency < 0) config_error("controller.mode_switch_ms", "must be >= 0");
  if (cp.command_gap < 0) config_error("controller.command_gap_ms", "must be >= 0");
  if (cp.discovery_timeout && *cp.discovery_timeout <= 0) {
    config_error("controller.discovery_timeout_ms", "must be positive");
  }
  if (cp.quiescence && *cp.quiescence <= 0) config_error("controller.quiescence_ms", "must be positive");
  if (cp.max_select_attempts == 0) config_error("controller.max_select_attempts", "must be positive");
  if (cp.max_start_attempts == 0) config_error("controller.max_start_attempts", "must be positive");
}

std::string ble_mode(const Scenario& scenario) {
  return scenario.kind == PduKind::LegacyNonConnectable ? "legacy" : "extended";
}

std::vector<RunSpec> expand(const Scenario& sc) {
  std::vector<RunSpec> runs;
  const bool loss_sweep = sc.loss_values.size() > 1;
  for (SimTime t : sc.t_values) {
    for (double p : sc.loss_values) {
      for (std::uint64_t seed : sc.seeds) {
        std::string id = fmt::format("{}-t{}", sc.name, t);
        if (loss_sweep) id += "-p" + format_loss(p);
        id += fmt::format("-s{}", seed);
        runs.push_back(RunSpec{std::move(id), t, p, seed});
      }
    }
  }
  return runs;
}

TransferSetup make_setup(const Scenario& sc, const RunSpec& run) {
  TransferSetup setup;
  setup.kind = sc.kind;
  setup.extended = sc.extended;
  setup.z = sc.z;
  setup.payload = sc.payload;
  setup.interval = run.interval;
  setup.repeats = sc.repeats;
  setup.timeout = sc.timeout;
  if (sc.loss_kind == LossKind::PerChannel) {
    setup.medium.loss = sc.channel_loss;
  } else {
    setup.medium.loss = BernoulliLoss{run.loss};
  }
  setup.medium.max_delay_ms = sc.max_delay;
  setup.medium.seed = run.seed;
  setup.medium.event_budget = sc.event_budget;
  setup.controller = sc.controller;
  setup.policies = sc.policies;
  setup.agents = sc.agents;
  setup.target = sc.target;
  setup.uuid_a = sc.uuid_a;
  setup.identity_seed = run.seed ^ 0x5DEECE66DULL;
  return setup;
}

RunResult run_one(const Scenario& sc, const RunSpec& run, bool trace) {
  RunResult r;
  r.spec = run;
  r.outcome = simulate_transfer(make_setup(sc, run), trace);
  r.label = RunLabel{run.run_id, sc.device_profile, ble_mode(sc), run.interval, sc.z, sc.repeats, run.loss, run.seed};
  r.metrics = r.outcome.metrics.value_or(TransferMetrics{});
  if (r.metrics.curve.empty()) r.metrics.curve.push_back(CurvePoint{0, 0.0});
  r.payload_match = r.outcome.complete && r.outcome.received == sc.payload;
  return r;
}

SweepSummary run_sweep(const Scenario& sc, const SweepOptions& options) {
  const auto runs = expand(sc);
  std::vector<std::optional<RunResult>> results(runs.size());
  std::vector<std::string> errors(runs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        results[i] = run_one(sc, runs[i], options.trace);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned threads = options.threads != 0 ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!errors[i].empty()) {
      throw Error(Errc::SimulationFailure, fmt::format("run {}: {}", runs[i].run_id, errors[i]));
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) {
    throw Error(Errc::SimulationFailure, fmt::format("cannot create '{}': {}", options.out_dir.string(), ec.message()));
  }
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::SimulationFailure, fmt::format("cannot write '{}'", p.string()));
    return f;
  };

  std::ofstream metrics = open(options.out_dir / "metrics.csv");
  std::ofstream curves = open(options.out_dir / "curves.csv");
  std::ofstream transfers = open(options.out_dir / "transfers.csv");
  metrics << kMetricsCsvHeader << '\n';
  curves << kCurvesCsvHeader << '\n';
  transfers << "run_id,segments,complete,recovery_rounds\n";
  std::optional<std::ofstream> trace;
  if (options.trace) trace = open(options.out_dir / "trace.log");
  if (options.dump_pdus) std::filesystem::create_directories(options.out_dir / "pdus");

  SweepSummary summary;
  summary.runs = runs.size();
  std::vector<std::string> mismatched;
  for (const auto& r : results) {
    metrics << metrics_csv_row(r->label, r->metrics) << '\n';
    curves << curve_csv_rows(r->spec.run_id, r->metrics.curve);
    transfers << fmt::format("{},{},{},{}\n", r->spec.run_id, r->outcome.segments, r->outcome.complete ? 1 : 0,
                             r->outcome.recovery_rounds);
    if (trace) {
      for (const auto& line : r->outcome.trace) *trace << "run=" << r->spec.run_id << ' ' << format(line) << '\n';
    }
    if (options.dump_pdus) {
      std::ofstream pdus = open(options.out_dir / "pdus" / (r->spec.run_id + ".hex"));
      for (const auto& e : r->outcome.log) pdus << to_hex(serialize_pdu(e.pdu)) << '\n';
    }
    if (r->outcome.complete) {
      ++summary.complete;
      if (!r->payload_match) mismatched.push_back(r->spec.run_id);
    } else {
      summary.incomplete.push_back(r->spec.run_id);
    }
  }
  metrics.close();
  curves.close();
  transfers.close();

  if (!mismatched.empty()) {
    throw Error(Errc::SimulationFailure, fmt::format("reconstructed payload differs in {}", mismatched.front()));
  }
  if (options.require_complete && !summary.incomplete.empty()) {
    throw Error(Errc::SimulationFailure, fmt::format("{} of {} transfers incomplete, first: {}",
                                                     summary.incomplete.size(), summary.runs,
                                                     summary.incomplete.front()));
  }
  return summary;
}

}  // namespace blecc
