#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mdma/common.hpp"
#include "mdma/waveform.hpp"

namespace mdma::control {

/// OFDM beacon numerology.
///
/// Logical subcarrier 0 is the primary control tone (PCT); logical indices 1..K*X carry the
/// secondary control tones (SCT) of the X cells. Logical index i sits on physical (signed)
/// bin pct_bin + i, skipping the DC bin. The default pct_bin is the first usable bin above
/// the lower guard band.
struct BeaconConfig {
  std::size_t fft_size = 128;
  std::size_t cp_len = 16;
  std::size_t num_cells = 7;      // X
  std::size_t scts_per_cell = 8;  // K
  std::size_t guard_bins = 8;     // excluded at each band edge
  std::optional<int> pct_bin;
  /// PCT amplitude relative to the unit-amplitude SCTs.
  double pct_amplitude = 2.0;
  /// The FFT window starts this many samples before the end of the cyclic prefix.
  std::size_t window_backoff = 8;

  void validate() const;
  std::size_t symbol_length() const { return fft_size + cp_len; }
  std::size_t logical_count() const { return scts_per_cell * num_cells + 1; }
  int pct_physical_bin() const;
  /// Physical signed bin of a logical subcarrier index.
  int physical_bin(std::size_t logical) const;
  /// Physical bins of the guard bands (both edges).
  std::vector<int> guard_band_bins() const;
};

/// Logical SCT indices of cell alpha: {alpha + j*X : j = 0..K-1}.
std::vector<std::size_t> sct_subcarriers(std::size_t cell_id, const BeaconConfig& cfg);

/// Frequency-domain content of one beacon OFDM symbol in DFT-bin order.
CVec beacon_spectrum(std::size_t cell_id, cplx dpsk_symbol, const BeaconConfig& cfg, bool include_pct = true);

/// One OFDM symbol: unitary IDFT of the spectrum with the cyclic prefix prepended.
waveform::BasebandSignal build_beacon_symbol(std::size_t cell_id, cplx dpsk_symbol, const BeaconConfig& cfg,
                                             bool include_pct = true);

/// Concatenated beacon symbols, one per DPSK value.
CVec build_beacon_stream(std::size_t cell_id, std::span<const cplx> dpsk_symbols, const BeaconConfig& cfg,
                         bool include_pct = true);

/// Multiplies sample n by exp(j*2*pi*cfo*(n + start_index)), cfo in cycles per sample.
CVec apply_frequency_offset(std::span<const cplx> x, double cfo, std::size_t start_index = 0);

/// I/Q file format: interleaved little-endian float32 (I, Q) pairs, no header.
void write_iq(const std::filesystem::path& path, std::span<const cplx> samples);
CVec read_iq(const std::filesystem::path& path);

}  // namespace mdma::control
