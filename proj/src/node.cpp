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

#include "blecc/node.hpp"

#include <fmt/format.h>

namespace blecc {

std::string format(const TraceLine& line) {
  return fmt::format("t={} node={} phase={} event={} out={}", line.time, line.node,
                     line.phase.empty() ? "-" : line.phase, line.event.empty() ? "-" : line.event,
                     line.outputs.empty() ? "-" : line.outputs);
}

std::string describe(const NodeEvent& event) {
  switch (event.index()) {
    case 0:
      return "start";
    case 1:
      return fmt::format("rx:{}B", std::get<ev::Received>(event).service_data.size());
    case 2:
      return fmt::format("timer:{}", std::get<ev::TimerExpiry>(event).tag);
    default: {
      const auto& tx = std::get<ev::Transmitted>(event);
      return fmt::format("{}:{}", tx.blocked ? "tx_blocked" : "tx_done", tx.tag);
    }
  }
}

NodeActions to_actions(const StepOutput& step, const RadioProfile& radio, const Uuid128& uuid, SimTime now,
                       const std::string& node, const std::string& phase, const NodeEvent& event, Trace& trace) {
  NodeActions actions;
  actions.timers = step.timers;
  actions.cancel_pending = step.cancel_pending;
  const std::size_t budget = radio.budget();
  std::string outputs;
  for (const auto& out : step.sends) {
    const Bytes data = encode_message(out.message, budget);
    actions.adverts.push_back(
        AdvertRequest{build_pdu(radio.kind, radio.address, uuid, data, radio.extended), out.base_time, out.tag});
    if (trace.enabled()) {
      if (!outputs.empty()) outputs += ';';
      outputs += describe(out.message);
    }
  }
  if (trace.enabled()) {
    if (step.cancel_pending) outputs += outputs.empty() ? "cancel" : ";cancel";
    for (const auto& note : step.notes) {
      if (!outputs.empty()) outputs += ';';
      outputs += "note:" + note;
    }
    trace.add(TraceLine{now, node, phase, step.event.empty() ? describe(event) : step.event, outputs});
  }
  return actions;
}

}  // namespace blecc
