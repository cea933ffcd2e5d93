#pragma once

#include <cstddef>
#include <vector>

#include "mdma/channel_model.hpp"
#include "mdma/common.hpp"
#include "mdma/uplink_phy.hpp"

namespace mdma::downlink {

/// Per-antenna pre-RAKE filters w^(m)(n) = conj(h_hat^(m)(N-1-n)) and the scalar g that
/// makes the radiated energy per symbol equal to one.
struct PrerakeWeights {
  std::vector<CVec> per_antenna_filters;
  double normalization = 1.0;

  std::size_t antenna_count() const { return per_antenna_filters.size(); }
  std::size_t tap_count() const { return per_antenna_filters.empty() ? 0 : per_antenna_filters.front().size(); }
  /// g^2 * sum |w|^2
  double radiated_energy() const;
};

PrerakeWeights prerake_weights(const uplink::ChannelEstimate& est);

/// Multiplies each antenna's estimate by an independent complex gain 1 + e,
/// e ~ CN(0, error_variance). Models imperfect transceiver reciprocity calibration.
uplink::ChannelEstimate apply_reciprocity_error(const uplink::ChannelEstimate& est, double error_variance,
                                                std::uint64_t seed);

/// BPSK symbols every symbol_spacing samples, convolved with each antenna's filter and scaled by g.
/// Output length per antenna: bits.size() * spacing + N - 1.
AntennaSignals transmit_downlink(std::span<const std::uint8_t> bits, const PrerakeWeights& w,
                                 std::size_t symbol_spacing = 1);

/// Same, for an arbitrary symbol stream (used to superpose users).
AntennaSignals transmit_downlink_symbols(std::span<const cplx> symbols, const PrerakeWeights& w,
                                         std::size_t symbol_spacing = 1);

/// Single-antenna user reception: sum over BS antennas of h^(m) (*) x^(m).
CVec propagate_downlink(const channel::ChannelMatrix& h, const AntennaSignals& tx);

/// g * sum_m h^(m) (*) w^(m); 2N-1 taps with the coherent peak at index N-1.
CVec effective_downlink_channel(const channel::ChannelMatrix& h, const PrerakeWeights& w);

/// Index of the coherent peak of the effective channel relative to the first symbol.
inline std::size_t center_tap_index(std::size_t path_count) { return path_count - 1; }

/// Samples rx at first_sample + k * spacing for k < count and hard-decides each.
Bits user_receive(std::span<const cplx> rx, std::size_t first_sample, std::size_t count,
                  std::size_t symbol_spacing = 1);
CVec user_sample(std::span<const cplx> rx, std::size_t first_sample, std::size_t count,
                 std::size_t symbol_spacing = 1);

}  // namespace mdma::downlink
