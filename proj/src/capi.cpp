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

#include "blecc/blecc.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "blecc/error.hpp"
#include "blecc/pdu.hpp"
#include "blecc/protocol.hpp"
#include "blecc/scenario.hpp"

struct blecc_scenario {
  blecc::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

blecc_status status_of(blecc::Errc code) {
  using blecc::Errc;
  switch (code) {
    case Errc::ConfigError: return BLECC_ERR_CONFIG;
    case Errc::SimulationFailure:
    case Errc::LivelockGuard: return BLECC_ERR_SIMULATION;
    case Errc::TruncatedFrame:
    case Errc::LengthMismatch:
    case Errc::UnknownAdType:
    case Errc::BadFraming:
    case Errc::CrcMismatch:
    case Errc::UnsupportedPduType: return BLECC_ERR_PARSE;
    case Errc::OversizeServiceData:
    case Errc::OversizeMessage:
    case Errc::PayloadTooLarge: return BLECC_ERR_CAPACITY;
    default: return BLECC_ERR_INVALID_ARGUMENT;
  }
}

template <class F>
blecc_status guarded(F&& body) {
  try {
    body();
    return BLECC_OK;
  } catch (const blecc::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BLECC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BLECC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return BLECC_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw blecc::Error(blecc::Errc::InvalidArgument, what);
}

}  // namespace

extern "C" {

const char* blecc_last_error(void) { return g_last_error.c_str(); }

const char* blecc_version(void) { return "0.1.0"; }

blecc_status blecc_scenario_load(const char* path, blecc_scenario** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto handle = std::make_unique<blecc_scenario>();
    handle->scenario = blecc::load_scenario(path);
    *out = handle.release();
  });
}

blecc_status blecc_scenario_override_seed(blecc_scenario* scenario, uint64_t seed) {
  return guarded([&] {
    require(scenario != nullptr, "null scenario");
    scenario->scenario.seeds = {seed};
  });
}

blecc_status blecc_scenario_run_count(const blecc_scenario* scenario, size_t* out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    *out = blecc::expand(scenario->scenario).size();
  });
}

blecc_status blecc_scenario_run(const blecc_scenario* scenario, const blecc_run_options* options,
                                blecc_run_summary* summary) {
  return guarded([&] {
    require(scenario != nullptr && options != nullptr, "null argument");
    require(options->out_dir != nullptr, "out_dir is required");
    blecc::SweepOptions o;
    o.out_dir = options->out_dir;
    o.trace = options->trace != 0;
    o.dump_pdus = options->dump_pdus != 0;
    o.require_complete = options->require_complete != 0;
    o.threads = options->threads;
    const auto s = blecc::run_sweep(scenario->scenario, o);
    if (summary != nullptr) *summary = blecc_run_summary{s.runs, s.complete};
  });
}

void blecc_scenario_free(blecc_scenario* scenario) { delete scenario; }

blecc_status blecc_segment_count(size_t payload_length, size_t z, size_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = blecc::segment_count(payload_length, z);
  });
}

blecc_status blecc_pdu_encode(blecc_pdu_kind kind, size_t madl, const uint8_t address[6], const uint8_t uuid[16],
                              const uint8_t* data, size_t data_len, uint8_t* out, size_t out_cap, size_t* out_len) {
  return guarded([&] {
    require(address != nullptr && uuid != nullptr && out_len != nullptr, "null argument");
    require(data != nullptr || data_len == 0, "null data");
    require(kind == BLECC_PDU_LEGACY || kind == BLECC_PDU_EXTENDED, "unknown pdu kind");
    blecc::DeviceAddress a{};
    blecc::Uuid128 u{};
    std::copy_n(address, a.size(), a.begin());
    std::copy_n(uuid, u.size(), u.begin());
    std::optional<blecc::ExtendedConfig> cfg;
    const auto k = kind == BLECC_PDU_LEGACY ? blecc::PduKind::LegacyNonConnectable
                                            : blecc::PduKind::ExtendedNonConnectable;
    if (k == blecc::PduKind::ExtendedNonConnectable) cfg = blecc::ExtendedConfig{madl};
    const auto frame = blecc::serialize_pdu(blecc::build_pdu(k, a, u, blecc::ByteView(data, data_len), cfg));
    *out_len = frame.size();
    if (frame.size() > out_cap || out == nullptr) {
      throw blecc::Error(blecc::Errc::OversizeMessage, "output buffer too small");
    }
    std::copy(frame.begin(), frame.end(), out);
  });
}

blecc_status blecc_pdu_decode(const uint8_t* frame, size_t frame_len, uint8_t uuid[16], uint8_t* data,
                              size_t data_cap, size_t* data_len) {
  return guarded([&] {
    require(frame != nullptr || frame_len == 0, "null frame");
    require(uuid != nullptr && data_len != nullptr, "null argument");
    const auto block = blecc::service_data_of(blecc::parse_pdu(blecc::ByteView(frame, frame_len)));
    *data_len = block.data.size();
    if (block.data.size() > data_cap || (data == nullptr && !block.data.empty())) {
      throw blecc::Error(blecc::Errc::OversizeMessage, "output buffer too small");
    }
    std::copy(block.uuid.begin(), block.uuid.end(), uuid);
    std::copy(block.data.begin(), block.data.end(), data);
  });
}

}  // extern "C"
