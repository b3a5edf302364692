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

#include "blecc/error.hpp"

#include <string>

namespace blecc {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::OversizeServiceData: return "OversizeServiceData";
    case Errc::MissingExtendedConfig: return "MissingExtendedConfig";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::TruncatedFrame: return "TruncatedFrame";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownAdType: return "UnknownAdType";
    case Errc::BadFraming: return "BadFraming";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::UnsupportedPduType: return "UnsupportedPduType";
    case Errc::OversizeMessage: return "OversizeMessage";
    case Errc::UnknownCommand: return "UnknownCommand";
    case Errc::MalformedArguments: return "MalformedArguments";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::ConflictingDuplicate: return "ConflictingDuplicate";
    case Errc::OutOfRangeSegment: return "OutOfRangeSegment";
    case Errc::UnknownAgent: return "UnknownAgent";
    case Errc::ProtocolViolation: return "ProtocolViolation";
    case Errc::IncompleteLog: return "IncompleteLog";
    case Errc::InsufficientAlphabet: return "InsufficientAlphabet";
    case Errc::LivelockGuard: return "LivelockGuard";
    case Errc::ConfigError: return "ConfigError";
    case Errc::SimulationFailure: return "SimulationFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace blecc
