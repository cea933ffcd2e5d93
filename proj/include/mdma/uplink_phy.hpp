#pragma once

#include <cstddef>
#include <vector>

#include "mdma/channel_model.hpp"
#include "mdma/common.hpp"
#include "mdma/waveform.hpp"

namespace mdma::uplink {

/// Estimated M x N channel plus the pilot it was estimated from.
struct ChannelEstimate {
  channel::ChannelMatrix taps;
  unsigned pilot_root = 0;
  /// Per-tap estimation noise power (residual power over the pilot window / N_zc).
  double noise_floor = 0.0;

  /// Genie estimate: the true channel, zero noise floor.
  static ChannelEstimate perfect(const channel::ChannelMatrix& h);
};

struct RakeOutput {
  CVec soft_symbols;
  /// Largest matched-filter output magnitude seen on each antenna over the data field.
  std::vector<double> per_antenna_peak;
};

/// Periodic sliding correlation of the pilot window against the ZC pilot:
///   h_hat(n) = (1/N_zc) sum_i rx[off + (i + n) mod N_zc] conj(p[i]),  off = pilot_offset.
/// With a cyclic prefix of at least N-1 samples in front of the pilot the estimate is exact
/// for a noiseless single user.
ChannelEstimate estimate_channel(const AntennaSignals& rx, const waveform::ZcSequence& pilot,
                                 std::size_t path_count, std::size_t pilot_offset = 0);

/// Matched filter per antenna (conjugate time-reversed estimate), summed over antennas and
/// sampled at full overlap for each data symbol of the layout.
RakeOutput rake_receive(const AntennaSignals& rx, const ChannelEstimate& est, const waveform::BurstLayout& layout);

/// pdp[n] = (1/M) sum_m |h_hat^(m)(n)|^2
channel::PowerDelayProfile estimate_pdp(const ChannelEstimate& est);

struct SinrEstimatorConfig {
  /// Interference-plus-noise is floored at signal * 10^(-ceiling_db/10).
  double ceiling_db = 60.0;
};

struct SinrEstimate {
  /// Pre-combining ratio: signal / (received - signal), linear.
  double sinr = 0.0;
  /// Signal over the whole received power (no subtraction), linear.
  double raw_sinr = 0.0;
  double signal_power = 0.0;
  double received_power = 0.0;
};

/// Signal power is (1/M) sum |h_hat|^2; received power is the average per-sample power over
/// the pilot window [pilot_offset, pilot_offset + pilot_len) across antennas.
SinrEstimate estimate_sinr(const ChannelEstimate& est, const AntennaSignals& rx, std::size_t pilot_offset,
                           std::size_t pilot_len, const SinrEstimatorConfig& cfg = {});

/// Index of the first tap whose power reaches threshold * max(pdp).
std::size_t timing_advance_from_pdp(const channel::PowerDelayProfile& pdp, double threshold = 0.1);

/// Combined matched-filter response of user `desired`'s RAKE to user `other`'s channel:
///   r(l) = sum_m sum_n conj(h_d^(m)(n)) h_o^(m)(n + l),  l = -(N-1)..(N-1),
/// returned with index l + N - 1. r(0) for desired == other is the combining gain.
CVec combined_correlation(const channel::ChannelMatrix& desired, const channel::ChannelMatrix& other);

}  // namespace mdma::uplink
