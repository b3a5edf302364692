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

#include "blecc/pdu.hpp"

#include <algorithm>
#include <string>

#include "blecc/error.hpp"

namespace blecc {

namespace {

// Fixed extended header: ext-hdr length 9 with AdvMode 0 (non-connectable,
// non-scannable), flags with AdvA and ADI present, then AdvA and ADI.
constexpr std::uint8_t kExtHeaderLengthByte = 0x09;
constexpr std::uint8_t kExtFlagAdvA = 0x01;
constexpr std::uint8_t kExtFlagAdi = 0x08;
constexpr std::uint8_t kTxAddRandom = 0x40;

bool is_legacy_with_adv_data(std::uint8_t type) {
  return type == pdu_type::kAdvInd || type == pdu_type::kAdvNonconnInd ||
         type == pdu_type::kScanRsp || type == pdu_type::kAdvScanInd;
}

std::size_t header_bytes(PduKind kind) {
  return kind == PduKind::LegacyNonConnectable ? 2 : 3;
}

std::size_t fixed_payload_bytes(PduKind kind) {
  return kind == PduKind::LegacyNonConnectable ? kAddressBytes : kExtendedHeaderBytes;
}

std::uint32_t reverse24(std::uint32_t v) {
  std::uint32_t r = 0;
  for (int i = 0; i < 24; ++i) {
    r = (r << 1) | ((v >> i) & 1u);
  }
  return r;
}

// Walks the AD structures in `adv_data`. Exactly one service-data structure
// must be present and it must cover the whole field.
ServiceDataBlock walk_ad(ByteView adv_data) {
  if (adv_data.empty()) {
    throw Error(Errc::LengthMismatch, "AdvData is empty");
  }
  std::size_t pos = 0;
  std::optional<ServiceDataBlock> found;
  while (pos < adv_data.size()) {
    const std::size_t ad_length = adv_data[pos];
    if (ad_length == 0) {
      throw Error(Errc::LengthMismatch, "zero-length AD structure at offset " + std::to_string(pos));
    }
    if (pos + 1 + ad_length > adv_data.size()) {
      throw Error(Errc::LengthMismatch, "AD length " + std::to_string(ad_length) + " at offset " +
                                            std::to_string(pos) + " overruns AdvData");
    }
    const std::uint8_t ad_type = adv_data[pos + 1];
    if (ad_type != kServiceDataAdType) {
      throw Error(Errc::UnknownAdType, "AD type 0x" + to_hex(adv_data.subspan(pos + 1, 1)));
    }
    if (ad_length < 1 + kUuidBytes) {
      throw Error(Errc::LengthMismatch, "service-data AD shorter than its UUID");
    }
    if (found) {
      throw Error(Errc::LengthMismatch, "more than one service-data AD structure");
    }
    ServiceDataBlock block;
    // UUIDs travel little-endian.
    for (std::size_t i = 0; i < kUuidBytes; ++i) {
      block.uuid[kUuidBytes - 1 - i] = adv_data[pos + 2 + i];
    }
    const auto data = adv_data.subspan(pos + 2 + kUuidBytes, ad_length - 1 - kUuidBytes);
    block.data.assign(data.begin(), data.end());
    found = std::move(block);
    pos += 1 + ad_length;
  }
  return std::move(*found);
}

void check_invariants(const AdvertisingPdu& pdu) {
  if (pdu.header_type > 0x0F) {
    throw Error(Errc::InvariantViolation, "header_type does not fit 4 bits");
  }
  const std::size_t expected = fixed_payload_bytes(pdu.kind) + pdu.adv_data.size();
  if (pdu.payload_length != expected) {
    throw Error(Errc::InvariantViolation, "payload_length " + std::to_string(pdu.payload_length) +
                                              " != serialized payload " + std::to_string(expected));
  }
  if (pdu.kind == PduKind::LegacyNonConnectable) {
    if (!is_legacy_with_adv_data(pdu.header_type)) {
      throw Error(Errc::InvariantViolation, "legacy header_type carries no AdvData");
    }
    if (pdu.adv_data.size() > kLegacyMaxAdvData) {
      throw Error(Errc::InvariantViolation, "legacy AdvData exceeds 31 bytes");
    }
  } else {
    if (pdu.header_type != pdu_type::kAdvExtInd) {
      throw Error(Errc::InvariantViolation, "extended PDU must use the extended type code");
    }
    if (pdu.adv_data.size() > kMaxExtendedAdvData) {
      throw Error(Errc::InvariantViolation, "extended AdvData exceeds MADL");
    }
  }
  try {
    walk_ad(pdu.adv_data);
  } catch (const Error& e) {
    throw Error(Errc::InvariantViolation, e.what());
  }
}

}  // namespace

const char* to_string(PduKind kind) noexcept {
  return kind == PduKind::LegacyNonConnectable ? "legacy" : "extended";
}

void validate(const ExtendedConfig& cfg) {
  if (cfg.madl <= kLegacyMaxAdvData || cfg.madl > kMaxMadl) {
    throw Error(Errc::InvalidArgument,
                "madl must satisfy 31 < madl <= 254, got " + std::to_string(cfg.madl));
  }
}

std::size_t max_service_data(PduKind kind, const std::optional<ExtendedConfig>& cfg) {
  if (kind == PduKind::LegacyNonConnectable) return kLegacyMaxServiceData;
  if (!cfg) throw Error(Errc::MissingExtendedConfig, "extended PDU requires an ExtendedConfig");
  validate(*cfg);
  return cfg->madl - kUuidBytes;
}

std::size_t frame_overhead(PduKind kind) {
  return kFramingBytes + header_bytes(kind) + fixed_payload_bytes(kind) + kAdHeaderBytes + kUuidBytes;
}

std::uint32_t crc24(ByteView data, std::uint32_t init) {
  // Polynomial x^24 + x^10 + x^9 + x^6 + x^4 + x^3 + x + 1, processed LSB
  // first on a bit-reversed register.
  constexpr std::uint32_t kLfsrMask = 0x5A6000;
  std::uint32_t state = reverse24(init & 0xFFFFFF);
  for (std::uint8_t byte : data) {
    std::uint8_t cur = byte;
    for (int bit = 0; bit < 8; ++bit) {
      const bool next = ((state ^ cur) & 1u) != 0;
      cur >>= 1;
      state >>= 1;
      if (next) {
        state |= 1u << 23;
        state ^= kLfsrMask;
      }
    }
  }
  return state;
}

Bytes encode_ad(const ServiceDataBlock& block) {
  Bytes out;
  out.reserve(kAdHeaderBytes + kUuidBytes + block.data.size());
  out.push_back(static_cast<std::uint8_t>(1 + kUuidBytes + block.data.size()));
  out.push_back(kServiceDataAdType);
  out.insert(out.end(), block.uuid.rbegin(), block.uuid.rend());
  out.insert(out.end(), block.data.begin(), block.data.end());
  return out;
}

ServiceDataBlock decode_ad(ByteView adv_data) { return walk_ad(adv_data); }

ServiceDataBlock service_data_of(const AdvertisingPdu& pdu) { return walk_ad(pdu.adv_data); }

AdvertisingPdu build_pdu(PduKind kind, const DeviceAddress& adv_address, const Uuid128& uuid,
                         ByteView service_data, const std::optional<ExtendedConfig>& cfg) {
  const std::size_t bound = max_service_data(kind, cfg);
  if (service_data.size() > bound) {
    throw Error(Errc::OversizeServiceData, std::to_string(service_data.size()) +
                                               " service-data bytes exceed the " +
                                               std::to_string(bound) + "-byte bound");
  }
  AdvertisingPdu pdu;
  pdu.kind = kind;
  pdu.header_type =
      kind == PduKind::LegacyNonConnectable ? pdu_type::kAdvNonconnInd : pdu_type::kAdvExtInd;
  pdu.adv_address = adv_address;
  pdu.adv_data = encode_ad(ServiceDataBlock{uuid, Bytes(service_data.begin(), service_data.end())});
  pdu.payload_length =
      static_cast<std::uint16_t>(fixed_payload_bytes(kind) + pdu.adv_data.size());
  return pdu;
}

Bytes serialize_pdu(const AdvertisingPdu& pdu) {
  check_invariants(pdu);

  Bytes out;
  out.reserve(kFramingBytes + header_bytes(pdu.kind) + pdu.payload_length);
  out.push_back(kPreamble);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(kAdvertisingAccessAddress >> (8 * i)));
  }
  const std::size_t pdu_start = out.size();

  out.push_back(static_cast<std::uint8_t>(pdu.header_type | kTxAddRandom));
  if (pdu.kind == PduKind::LegacyNonConnectable) {
    out.push_back(static_cast<std::uint8_t>(pdu.payload_length & 0x3F));
  } else {
    out.push_back(static_cast<std::uint8_t>(pdu.payload_length & 0xFF));
    out.push_back(static_cast<std::uint8_t>(pdu.payload_length >> 8));
    out.push_back(kExtHeaderLengthByte);
    out.push_back(kExtFlagAdvA | kExtFlagAdi);
  }
  // AdvA goes out little-endian.
  out.insert(out.end(), pdu.adv_address.rbegin(), pdu.adv_address.rend());
  if (pdu.kind == PduKind::ExtendedNonConnectable) {
    out.push_back(0x00);  // ADI: DID/SID placeholder
    out.push_back(0x00);
  }
  out.insert(out.end(), pdu.adv_data.begin(), pdu.adv_data.end());

  const std::uint32_t crc = crc24(ByteView(out).subspan(pdu_start));
  out.push_back(static_cast<std::uint8_t>(crc));
  out.push_back(static_cast<std::uint8_t>(crc >> 8));
  out.push_back(static_cast<std::uint8_t>(crc >> 16));
  return out;
}

AdvertisingPdu parse_pdu(ByteView raw) {
  constexpr std::size_t kPrefix = 5;  // preamble + access address
  if (raw.size() < kPrefix + 2) {
    throw Error(Errc::TruncatedFrame, "frame shorter than preamble, access address and header");
  }
  if (raw[0] != kPreamble) throw Error(Errc::BadFraming, "bad preamble");
  std::uint32_t aa = 0;
  for (int i = 0; i < 4; ++i) aa |= static_cast<std::uint32_t>(raw[1 + i]) << (8 * i);
  if (aa != kAdvertisingAccessAddress) throw Error(Errc::BadFraming, "not the advertising access address");

  const std::uint8_t type = raw[kPrefix] & 0x0F;
  AdvertisingPdu pdu;
  pdu.header_type = type;
  std::size_t length = 0;
  std::size_t hdr = 2;
  if (type == pdu_type::kAdvExtInd) {
    pdu.kind = PduKind::ExtendedNonConnectable;
    hdr = 3;
    if (raw.size() < kPrefix + hdr) throw Error(Errc::TruncatedFrame, "extended header cut short");
    length = static_cast<std::size_t>(raw[kPrefix + 1]) |
             (static_cast<std::size_t>(raw[kPrefix + 2]) << 8);
  } else if (is_legacy_with_adv_data(type)) {
    pdu.kind = PduKind::LegacyNonConnectable;
    length = raw[kPrefix + 1] & 0x3F;
  } else {
    throw Error(Errc::UnsupportedPduType, "PDU type " + std::to_string(type) + " carries no AdvData");
  }

  const std::size_t declared = kPrefix + hdr + length + 3;
  if (raw.size() < declared) {
    throw Error(Errc::TruncatedFrame, "frame holds " + std::to_string(raw.size()) + " bytes, header declares " +
                                          std::to_string(declared));
  }
  if (raw.size() > declared) {
    throw Error(Errc::LengthMismatch, std::to_string(raw.size() - declared) + " trailing bytes after CRC");
  }

  const ByteView pdu_bytes = raw.subspan(kPrefix, hdr + length);
  const std::uint32_t crc = static_cast<std::uint32_t>(raw[declared - 3]) |
                            (static_cast<std::uint32_t>(raw[declared - 2]) << 8) |
                            (static_cast<std::uint32_t>(raw[declared - 1]) << 16);
  if (crc != crc24(pdu_bytes)) throw Error(Errc::CrcMismatch, "CRC-24 does not match");

  const ByteView payload = pdu_bytes.subspan(hdr);
  std::size_t addr_at = 0;
  std::size_t data_at = 0;
  if (pdu.kind == PduKind::LegacyNonConnectable) {
    if (length < kAddressBytes || length > kLegacyMaxPayload) {
      throw Error(Errc::LengthMismatch, "legacy payload length " + std::to_string(length) + " outside 6..37");
    }
    addr_at = 0;
    data_at = kAddressBytes;
  } else {
    if (length < kExtendedHeaderBytes || length > kExtendedHeaderBytes + kMaxExtendedAdvData) {
      throw Error(Errc::LengthMismatch, "extended payload length " + std::to_string(length) + " out of range");
    }
    if ((payload[0] & 0x3F) != kExtHeaderLengthByte) {
      throw Error(Errc::LengthMismatch, "extended header length is not 9");
    }
    if ((payload[1] & kExtFlagAdvA) == 0) {
      throw Error(Errc::BadFraming, "extended header lacks AdvA");
    }
    addr_at = 2;
    data_at = kExtendedHeaderBytes;
  }
  for (std::size_t i = 0; i < kAddressBytes; ++i) {
    pdu.adv_address[kAddressBytes - 1 - i] = payload[addr_at + i];
  }
  const ByteView adv_data = payload.subspan(data_at);
  walk_ad(adv_data);
  pdu.adv_data.assign(adv_data.begin(), adv_data.end());
  pdu.payload_length = static_cast<std::uint16_t>(length);
  return pdu;
}

}  // namespace blecc
