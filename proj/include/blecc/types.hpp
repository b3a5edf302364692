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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blecc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Simulated time in integer milliseconds.
using SimTime = std::int64_t;

using NodeId = std::uint32_t;

using DeviceAddress = std::array<std::uint8_t, 6>;

/// 128-bit UUID held in canonical (display) byte order.
using Uuid128 = std::array<std::uint8_t, 16>;

/// Lowercase hex, one space between bytes.
std::string to_hex(ByteView bytes);

/// Inverse of to_hex; whitespace between byte pairs is optional.
Bytes from_hex(std::string_view text);

std::string uuid_to_string(const Uuid128& uuid);

}  // namespace blecc
