#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mdma/common.hpp"

namespace mdma::waveform {

/// Odd-length Zadoff-Chu sequence x[n] = exp(-j*pi*q*n*(n+1)/N).
class ZcSequence {
 public:
  ZcSequence(unsigned root, std::size_t length);

  unsigned root() const { return root_; }
  std::size_t length() const { return samples_.size(); }
  std::span<const cplx> samples() const { return samples_; }
  const cplx& operator[](std::size_t n) const { return samples_[n]; }

 private:
  unsigned root_;
  CVec samples_;
};

ZcSequence zc_generate(unsigned root, std::size_t length);

/// c[l] = sum_n a[n] * conj(b[(n + l) mod N]) for l = 0..N-1.
CVec periodic_cross_correlation(std::span<const cplx> a, std::span<const cplx> b);

/// Published Barker code of length 7, 11 or 13 as +/-1 values.
std::vector<int> barker_header(std::size_t length);

/// 0 -> +1, 1 -> -1.
CVec bpsk_map(std::span<const std::uint8_t> bits);

/// Sign of the real part; an exact zero decides bit 0.
Bits bpsk_hard_decide(std::span<const cplx> soft);
std::uint8_t bpsk_decide(cplx soft);

/// s[0] = reference; s[i] = s[i-1] * (bit ? -1 : +1). Output has bits.size() + 1 symbols.
CVec dpsk_encode(std::span<const std::uint8_t> bits, cplx reference = {1.0, 0.0});

/// bit i = Re(s[i+1] * conj(s[i])) < 0. Output has symbols.size() - 1 bits.
Bits dpsk_decode(std::span<const cplx> symbols);

/// Transmit-side signal: samples before the amplitude `scale` (sqrt of power) is applied.
struct BasebandSignal {
  CVec samples;
  double scale = 1.0;

  CVec scaled() const;
};

/// Sample layout of an uplink burst: [cyclic prefix | pilot | data].
/// The cyclic prefix repeats the last cp_len pilot samples so a periodic correlation over
/// the pilot window is free of data leakage for channels up to cp_len + 1 taps.
/// Data symbols are placed every symbol_spacing samples (1 = back-to-back).
struct BurstLayout {
  std::size_t cp_len = 0;
  std::size_t pilot_len = 0;
  std::size_t data_len = 0;
  std::size_t symbol_spacing = 1;

  std::size_t pilot_offset() const { return cp_len; }
  std::size_t data_offset() const { return cp_len + pilot_len; }
  std::size_t length() const { return data_offset() + data_len * symbol_spacing; }
};

struct BurstOptions {
  std::size_t cp_len = 0;
  std::size_t symbol_spacing = 1;
};

class UplinkBurst {
 public:
  UplinkBurst(const ZcSequence& pilot, std::span<const std::uint8_t> bits, BurstOptions options = {});

  const BasebandSignal& signal() const { return signal_; }
  const BurstLayout& layout() const { return layout_; }
  unsigned pilot_root() const { return pilot_root_; }
  std::span<const cplx> data_symbols() const { return data_symbols_; }

 private:
  BasebandSignal signal_;
  BurstLayout layout_;
  unsigned pilot_root_;
  CVec data_symbols_;
};

/// Pilot samples followed by BPSK data, unit per-sample power before scaling.
UplinkBurst assemble_uplink_burst(const ZcSequence& pilot, std::span<const std::uint8_t> bits,
                                  BurstOptions options = {});

/// Data-only burst (no pilot), used when the receiver is given the channel directly.
BasebandSignal assemble_data_burst(std::span<const std::uint8_t> bits, std::size_t symbol_spacing = 1);

}  // namespace mdma::waveform
