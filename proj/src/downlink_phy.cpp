#include "mdma/downlink_phy.hpp"

#include <cmath>

#include "mdma/waveform.hpp"

namespace mdma::downlink {

double PrerakeWeights::radiated_energy() const {
  double e = 0.0;
  for (const auto& f : per_antenna_filters) e += energy(f);
  return e * normalization * normalization;
}

PrerakeWeights prerake_weights(const uplink::ChannelEstimate& est) {
  const auto& h = est.taps;
  const double total = h.total_energy();
  if (total <= 0.0) throw DegenerateInputError("pre-RAKE: all-zero channel estimate");
  PrerakeWeights w;
  const std::size_t n_paths = h.path_count();
  w.per_antenna_filters.assign(h.antenna_count(), CVec(n_paths));
  for (std::size_t m = 0; m < h.antenna_count(); ++m) {
    for (std::size_t n = 0; n < n_paths; ++n) w.per_antenna_filters[m][n] = std::conj(h(m, n_paths - 1 - n));
  }
  w.normalization = 1.0 / std::sqrt(total);
  return w;
}

uplink::ChannelEstimate apply_reciprocity_error(const uplink::ChannelEstimate& est, double error_variance,
                                                std::uint64_t seed) {
  uplink::ChannelEstimate out = est;
  if (error_variance <= 0.0) return out;
  Rng rng(seed);
  for (std::size_t m = 0; m < out.taps.antenna_count(); ++m) {
    const cplx gain = 1.0 + rng.complex_normal(error_variance);
    for (auto& t : out.taps.row(m)) t *= gain;
  }
  return out;
}

AntennaSignals transmit_downlink_symbols(std::span<const cplx> symbols, const PrerakeWeights& w,
                                         std::size_t symbol_spacing) {
  if (symbol_spacing == 0) throw ConfigError("symbol spacing must be >= 1");
  CVec spaced(symbols.size() * symbol_spacing, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < symbols.size(); ++k) spaced[k * symbol_spacing] = symbols[k];
  AntennaSignals out(w.antenna_count());
  for (std::size_t m = 0; m < w.antenna_count(); ++m) {
    out[m].assign(spaced.empty() ? 0 : spaced.size() + w.tap_count() - 1, cplx{0.0, 0.0});
    convolve_accumulate(w.per_antenna_filters[m], spaced, w.normalization, out[m]);
  }
  return out;
}

AntennaSignals transmit_downlink(std::span<const std::uint8_t> bits, const PrerakeWeights& w,
                                 std::size_t symbol_spacing) {
  const CVec symbols = waveform::bpsk_map(bits);
  return transmit_downlink_symbols(symbols, w, symbol_spacing);
}

CVec propagate_downlink(const channel::ChannelMatrix& h, const AntennaSignals& tx) {
  if (tx.size() != h.antenna_count()) throw ConfigError("downlink: antenna count mismatch");
  std::size_t len = 0;
  for (const auto& x : tx) len = std::max(len, x.empty() ? 0 : x.size() + h.path_count() - 1);
  CVec rx(len, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < tx.size(); ++m) convolve_accumulate(h.row(m), tx[m], 1.0, rx);
  return rx;
}

CVec effective_downlink_channel(const channel::ChannelMatrix& h, const PrerakeWeights& w) {
  if (w.antenna_count() != h.antenna_count()) throw ConfigError("effective channel: antenna count mismatch");
  CVec eff(h.path_count() + w.tap_count() - 1, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < h.antenna_count(); ++m) {
    convolve_accumulate(h.row(m), w.per_antenna_filters[m], w.normalization, eff);
  }
  return eff;
}

CVec user_sample(std::span<const cplx> rx, std::size_t first_sample, std::size_t count, std::size_t symbol_spacing) {
  if (symbol_spacing == 0) throw ConfigError("symbol spacing must be >= 1");
  if (count > 0 && first_sample + (count - 1) * symbol_spacing >= rx.size()) {
    throw FramingError("user_receive: symbol timing outside the received signal");
  }
  CVec out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = rx[first_sample + k * symbol_spacing];
  return out;
}

Bits user_receive(std::span<const cplx> rx, std::size_t first_sample, std::size_t count, std::size_t symbol_spacing) {
  return waveform::bpsk_hard_decide(user_sample(rx, first_sample, count, symbol_spacing));
}

}  // namespace mdma::downlink
