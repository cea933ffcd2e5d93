#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdma/beacon.hpp"
#include "mdma/common.hpp"
#include "mdma/control_frame.hpp"

namespace mdma::control {

struct SyncResult {
  /// First sample of the first whole OFDM symbol (start of its cyclic prefix).
  std::size_t symbol_timing = 0;
  /// Cycles per sample; |fractional_cfo| <= 0.5 / fft_size.
  double fractional_cfo = 0.0;
  /// Bins.
  int integer_cfo = 0;
  /// |P| normalized by the energy of the correlated windows, in [0, 1].
  double confidence = 0.0;

  double total_cfo(std::size_t fft_size) const {
    return fractional_cfo + static_cast<double>(integer_cfo) / static_cast<double>(fft_size);
  }
};

/// Cyclic-prefix correlation folded over every whole symbol that fits for all candidate
/// offsets theta in [0, symbol_length):
///   P(theta) = sum_s sum_{k < cp} conj(r[theta + s*L + k]) r[theta + s*L + k + N]
///   E(theta) = sum_s sum_{k < cp} (|r[.. + k]|^2 + |r[.. + k + N]|^2) / 2
/// timing = argmax |P| - rho E, fractional CFO = arg P / (2*pi*N). rho = snr / (snr + 1) is
/// the maximum-likelihood weight; rho = 0 gives the plain correlation peak, which drifts late
/// because the PCT stays periodic past the cyclic prefix.
SyncResult cp_synchronize(std::span<const cplx> rx, const BeaconConfig& cfg, double rho = 10.0 / 11.0);

/// Removes a frequency offset in cycles per sample (phase referenced to sample 0).
CVec correct_cfo(std::span<const cplx> rx, double cfo);

/// Unitary DFT of every whole symbol starting at `timing`, one spectrum per symbol.
std::vector<CVec> demodulate_symbols(std::span<const cplx> rx, std::size_t timing, const BeaconConfig& cfg);

/// argmax over d in [-W, W] of the symbol-averaged power at bin pct + d.
int integer_cfo(const std::vector<CVec>& spectra, const BeaconConfig& cfg, int search_window);
int integer_cfo(std::span<const cplx> rx, std::size_t timing, const BeaconConfig& cfg, int search_window);

struct CellPower {
  std::size_t cell_id = 0;
  double power = 0.0;
};

/// Symbol-averaged aggregate SCT power per cell, strongest first (ties: lower cell id).
std::vector<CellPower> cell_search(const std::vector<CVec>& spectra, const BeaconConfig& cfg);

/// Differential detection combined over the cell's SCTs:
///   z_t = sum_k Y_t(k) conj(Y_{t-1}(k)),  bit_t = Re z_t < 0.
/// One bit per consecutive symbol pair.
Bits decode_cell_bits(const std::vector<CVec>& spectra, std::size_t cell_id, const BeaconConfig& cfg);

/// DPSK symbols of `frames` consecutive copies of the frame, each opened by the reference +1.
CVec control_symbols(std::span<const std::uint8_t> frame_bits, std::size_t frames);

struct AcquisitionOptions {
  int integer_search_window = 4;
  double header_threshold = 0.7;
  double sync_rho = 10.0 / 11.0;
};

struct AcquisitionResult {
  SyncResult sync;
  std::vector<CellPower> ranking;
  std::size_t cell_id = 0;
  /// Bit index of the first header bit in the decoded stream.
  std::optional<std::size_t> frame_start;
  std::optional<BroadcastInfo> bch;
  std::optional<PagingInfo> pch;
  bool success = false;
  std::string failure;
};

/// Full downlink acquisition: CP sync, fractional then integer CFO, cell search, DPSK
/// decoding of the strongest cell, frame sync (validated by the BCH checksum) and BCH/PCH
/// decoding. Never throws for bad signal content; failures are reported in the result.
AcquisitionResult acquire(std::span<const cplx> rx, const BeaconConfig& cfg, const ControlFrameLayout& layout,
                          const AcquisitionOptions& options = {});

}  // namespace mdma::control
