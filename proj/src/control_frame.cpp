#include "mdma/control_frame.hpp"

#include <boost/crc.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "mdma/waveform.hpp"

namespace mdma::control {

namespace {

void put_field(Bits& out, std::uint32_t value, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
}

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bits) : bits_(bits) {}
  std::uint32_t take(std::size_t width) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 1) | (bits_[pos_++] & 1u);
    return v;
  }

 private:
  std::span<const std::uint8_t> bits_;
  std::size_t pos_ = 0;
};

std::uint16_t crc16(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bytes.size() * 8; ++i) {
    bytes[i / 8] = static_cast<std::uint8_t>((bytes[i / 8] << 1) | (bits[i] & 1u));
  }
  boost::crc_ccitt_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return static_cast<std::uint16_t>(crc.checksum());
}

}  // namespace

Bits header_bits(std::size_t header_len) {
  const auto code = waveform::barker_header(header_len);
  Bits bits(code.size());
  std::transform(code.begin(), code.end(), bits.begin(), [](int c) { return static_cast<std::uint8_t>(c < 0); });
  return bits;
}

Bits encode_bch(const BroadcastInfo& info, const ControlFrameLayout& layout) {
  if (info.pilot_roots.size() > layout.root_slots) {
    throw ConfigError("BCH: " + std::to_string(info.pilot_roots.size()) + " roots exceed " +
                      std::to_string(layout.root_slots) + " slots");
  }
  Bits bits;
  bits.reserve(layout.bch_bits());
  put_field(bits, static_cast<std::uint8_t>(info.beacon_power_db), 8);
  put_field(bits, static_cast<std::uint32_t>(info.pilot_roots.size()), 8);
  for (std::size_t i = 0; i < layout.root_slots; ++i) {
    put_field(bits, i < info.pilot_roots.size() ? info.pilot_roots[i] : 0u, 8);
  }
  put_field(bits, static_cast<std::uint8_t>(info.target_rach_power_db), 8);
  put_field(bits, crc16(bits), 16);
  return bits;
}

BroadcastInfo decode_bch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout) {
  if (bits.size() != layout.bch_bits()) {
    throw FramingError("BCH: expected " + std::to_string(layout.bch_bits()) + " bits, got " +
                       std::to_string(bits.size()));
  }
  const std::size_t body = layout.bch_bits() - 16;
  BitReader rd(bits);
  BroadcastInfo info;
  info.beacon_power_db = static_cast<std::int8_t>(static_cast<std::uint8_t>(rd.take(8)));
  const std::size_t count = rd.take(8);
  if (count > layout.root_slots) throw FramingError("BCH: root count exceeds the slot budget");
  for (std::size_t i = 0; i < layout.root_slots; ++i) {
    const auto r = static_cast<std::uint8_t>(rd.take(8));
    if (i < count) info.pilot_roots.push_back(r);
  }
  info.target_rach_power_db = static_cast<std::int8_t>(static_cast<std::uint8_t>(rd.take(8)));
  const auto crc = static_cast<std::uint16_t>(rd.take(16));
  if (crc != crc16(bits.first(body))) throw FramingError("BCH: checksum mismatch");
  return info;
}

std::optional<BroadcastInfo> try_decode_bch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout) {
  try {
    return decode_bch(bits, layout);
  } catch (const FramingError&) {
    return std::nullopt;
  }
}

Bits encode_pch(const PagingInfo& info, const ControlFrameLayout& layout) {
  if (info.ids.size() > layout.page_slots) throw ConfigError("PCH: too many paged ids for the slot budget");
  Bits bits;
  bits.reserve(layout.pch_bits());
  put_field(bits, static_cast<std::uint32_t>(info.ids.size()), 8);
  for (std::size_t i = 0; i < layout.page_slots; ++i) put_field(bits, i < info.ids.size() ? info.ids[i] : 0u, 16);
  return bits;
}

PagingInfo decode_pch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout) {
  if (bits.size() != layout.pch_bits()) {
    throw FramingError("PCH: expected " + std::to_string(layout.pch_bits()) + " bits, got " +
                       std::to_string(bits.size()));
  }
  BitReader rd(bits);
  const std::size_t count = rd.take(8);
  if (count > layout.page_slots) throw FramingError("PCH: id count exceeds the slot budget");
  PagingInfo info;
  for (std::size_t i = 0; i < layout.page_slots; ++i) {
    const auto id = static_cast<std::uint16_t>(rd.take(16));
    if (i < count) info.ids.push_back(id);
  }
  return info;
}

bool decode_pch(std::span<const std::uint8_t> bits, const ControlFrameLayout& layout, std::uint16_t my_id) {
  const auto info = decode_pch(bits, layout);
  return std::find(info.ids.begin(), info.ids.end(), my_id) != info.ids.end();
}

Bits encode_frame(const BroadcastInfo& bch, const PagingInfo& pch, const ControlFrameLayout& layout) {
  Bits frame = header_bits(layout.header_len);
  const Bits b = encode_bch(bch, layout);
  const Bits p = encode_pch(pch, layout);
  frame.insert(frame.end(), b.begin(), b.end());
  frame.insert(frame.end(), p.begin(), p.end());
  return frame;
}

std::vector<FrameSyncResult> header_candidates(std::span<const std::uint8_t> bits, std::span<const int> header,
                                               double threshold) {
  std::vector<FrameSyncResult> out;
  if (header.empty() || bits.size() < header.size()) return out;
  const double need = threshold * static_cast<double>(header.size());
  for (std::size_t lag = 0; lag + header.size() <= bits.size(); ++lag) {
    int c = 0;
    for (std::size_t i = 0; i < header.size(); ++i) c += header[i] * (bits[lag + i] ? -1 : 1);
    if (static_cast<double>(c) >= need) out.push_back({lag, c});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.peak > b.peak; });
  return out;
}

std::optional<FrameSyncResult> frame_sync(std::span<const std::uint8_t> bits, std::span<const int> header,
                                          double threshold) {
  auto c = header_candidates(bits, header, threshold);
  if (c.empty()) return std::nullopt;
  return c.front();
}

}  // namespace mdma::control
