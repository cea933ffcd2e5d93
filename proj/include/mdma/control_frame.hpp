#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdma/common.hpp"

namespace mdma::control {

/// System information carried on the BCH.
struct BroadcastInfo {
  std::int8_t beacon_power_db = 0;
  std::vector<std::uint8_t> pilot_roots;
  std::int8_t target_rach_power_db = 0;

  bool operator==(const BroadcastInfo&) const = default;
};

/// Paged user identifiers carried on the PCH.
struct PagingInfo {
  std::vector<std::uint16_t> ids;

  bool operator==(const PagingInfo&) const = default;
};

/// Fixed bit budget of one control frame (layout version 1):
///
///   header | BCH | PCH
///
///   BCH: beacon power (int8) | root count (uint8) | root_slots x root (uint8)
///        | target RACH power (int8) | CRC-16/CCITT-FALSE over the preceding bytes
///   PCH: id count (uint8) | page_slots x id (uint16)
///
/// All fields most-significant bit first. Unused root and id slots are zero.
struct ControlFrameLayout {
  static constexpr int kVersion = 1;

  std::size_t header_len = 13;
  std::size_t root_slots = 4;
  std::size_t page_slots = 2;

  std::size_t bch_bits() const { return 8 + 8 + 8 * root_slots + 8 + 16; }
  std::size_t pch_bits() const { return 8 + 16 * page_slots; }
  std::size_t frame_bits() const { return header_len + bch_bits() + pch_bits(); }
  /// DPSK symbols per frame: the known reference symbol plus one per bit.
  std::size_t frame_symbols() const { return frame_bits() + 1; }
};

/// Barker header as bits (+1 -> 0, -1 -> 1).
Bits header_bits(std::size_t header_len);

Bits encode_bch(const BroadcastInfo& info, const ControlFrameLayout& layout);
/// Throws FramingError on a length mismatch, a bad count field or a checksum failure.
BroadcastInfo decode_bch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout);
std::optional<BroadcastInfo> try_decode_bch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout);

Bits encode_pch(const PagingInfo& info, const ControlFrameLayout& layout);
PagingInfo decode_pch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout);
bool decode_pch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout, std::uint16_t my_id);

/// header | BCH | PCH
Bits encode_frame(const BroadcastInfo& bch, const PagingInfo& pch, const ControlFrameLayout& layout);

struct FrameSyncResult {
  std::size_t start = 0;
  int peak = 0;
};

/// Correlates the +/-1-mapped bits against the header and returns the lag of the largest
/// correlation, or nothing if the peak is below threshold * header length.
std::optional<FrameSyncResult> frame_sync(std::span<const std::uint8_t> bits, std::span<const int> header,
                                          double threshold = 0.7);

/// Every lag whose correlation reaches the threshold, strongest first (ties: earliest lag).
std::vector<FrameSyncResult> header_candidates(std::span<const std::uint8_t> bits, std::span<const int> header,
                                               double threshold = 0.7);

}  // namespace mdma::control
