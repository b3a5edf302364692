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

#include <cstddef>
#include <cstdint>
#include <optional>

#include "blecc/types.hpp"

namespace blecc {

/// Advertising PDU family. Both variants are non-connectable on the sending
/// side; the parser keeps the on-air PDU type in AdvertisingPdu::header_type.
enum class PduKind : std::uint8_t {
  LegacyNonConnectable,
  ExtendedNonConnectable,
};

const char* to_string(PduKind kind) noexcept;

namespace pdu_type {
inline constexpr std::uint8_t kAdvInd = 0x0;
inline constexpr std::uint8_t kAdvDirectInd = 0x1;
inline constexpr std::uint8_t kAdvNonconnInd = 0x2;
inline constexpr std::uint8_t kScanReq = 0x3;
inline constexpr std::uint8_t kScanRsp = 0x4;
inline constexpr std::uint8_t kConnectInd = 0x5;
inline constexpr std::uint8_t kAdvScanInd = 0x6;
inline constexpr std::uint8_t kAdvExtInd = 0x7;
}  // namespace pdu_type

/// AD type "Service Data - 128-bit UUID".
inline constexpr std::uint8_t kServiceDataAdType = 0x21;

inline constexpr std::size_t kUuidBytes = 16;
inline constexpr std::size_t kAddressBytes = 6;
inline constexpr std::size_t kAdHeaderBytes = 2;  // AD length + AD type

inline constexpr std::size_t kLegacyMaxAdvData = 31;
inline constexpr std::size_t kLegacyMaxServiceData =
    kLegacyMaxAdvData - kAdHeaderBytes - kUuidBytes;  // 13
inline constexpr std::size_t kLegacyMaxPayload = kAddressBytes + kLegacyMaxAdvData;  // 37

inline constexpr std::size_t kMaxMadl = 254;
/// Opaque extended header: ext-hdr length/AdvMode, flags, AdvA, ADI.
inline constexpr std::size_t kExtendedHeaderBytes = 10;
inline constexpr std::size_t kMaxExtendedAdvData = kMaxMadl + kAdHeaderBytes;

/// Framing around the PDU: preamble(1) + access address(4) + CRC(3).
inline constexpr std::size_t kFramingBytes = 1 + 4 + 3;
inline constexpr std::uint8_t kPreamble = 0xAA;
inline constexpr std::uint32_t kAdvertisingAccessAddress = 0x8E89BED6;
inline constexpr std::uint32_t kAdvertisingCrcInit = 0x555555;

/// Extended advertising capacity of one device.
///
/// `madl` bounds the service-data AD content, i.e. the 16-byte UUID plus the
/// service data. The AD length/type bytes are not counted, so the largest
/// service data is madl - 16 and the largest segment body is madl - 17.
struct ExtendedConfig {
  std::size_t madl = kMaxMadl;

  bool operator==(const ExtendedConfig&) const = default;
};

/// Throws Errc::InvalidArgument unless 31 < madl <= 254.
void validate(const ExtendedConfig& cfg);

/// Largest service-data byte count for one advertisement of `kind`.
std::size_t max_service_data(PduKind kind, const std::optional<ExtendedConfig>& cfg);

struct AdvertisingPdu {
  PduKind kind = PduKind::LegacyNonConnectable;
  std::uint8_t header_type = pdu_type::kAdvNonconnInd;
  std::uint16_t payload_length = 0;
  DeviceAddress adv_address{};
  Bytes adv_data;

  bool operator==(const AdvertisingPdu&) const = default;
};

struct ServiceDataBlock {
  Uuid128 uuid{};
  Bytes data;

  bool operator==(const ServiceDataBlock&) const = default;
};

/// Encodes one service-data AD structure: [len][0x21][uuid LE][data].
Bytes encode_ad(const ServiceDataBlock& block);

/// Decodes an AdvData field that must hold exactly one service-data AD
/// structure. Throws LengthMismatch or UnknownAdType.
ServiceDataBlock decode_ad(ByteView adv_data);

/// Convenience: decode_ad(pdu.adv_data).
ServiceDataBlock service_data_of(const AdvertisingPdu& pdu);

AdvertisingPdu build_pdu(PduKind kind, const DeviceAddress& adv_address, const Uuid128& uuid,
                         ByteView service_data, const std::optional<ExtendedConfig>& cfg);

/// Full link-layer frame: preamble, access address, PDU, CRC-24.
Bytes serialize_pdu(const AdvertisingPdu& pdu);

/// Inverse of serialize_pdu. Total over arbitrary input: every failure is
/// reported as an Error, no read goes past the declared lengths.
AdvertisingPdu parse_pdu(ByteView raw);

/// Bytes added by serialize_pdu on top of the service data.
std::size_t frame_overhead(PduKind kind);

/// BLE link-layer CRC-24 over `data`, LSB-first, with the given 24-bit init.
std::uint32_t crc24(ByteView data, std::uint32_t init = kAdvertisingCrcInit);

}  // namespace blecc
