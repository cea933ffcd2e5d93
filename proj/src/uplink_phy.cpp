#include "mdma/uplink_phy.hpp"

#include <algorithm>
#include <cmath>

namespace mdma::uplink {

ChannelEstimate ChannelEstimate::perfect(const channel::ChannelMatrix& h) {
  return ChannelEstimate{h, 0, 0.0};
}

ChannelEstimate estimate_channel(const AntennaSignals& rx, const waveform::ZcSequence& pilot,
                                 std::size_t path_count, std::size_t pilot_offset) {
  if (rx.empty()) throw ConfigError("no receive antennas");
  const std::size_t nzc = pilot.length();
  if (path_count == 0 || path_count > nzc) throw ConfigError("path count must be in [1, N_zc]");
  const auto p = pilot.samples();
  channel::ChannelMatrix taps(rx.size(), path_count);
  double residual = 0.0;
  CVec window(nzc), rebuilt(nzc);
  for (std::size_t m = 0; m < rx.size(); ++m) {
    if (rx[m].size() < pilot_offset + nzc) throw FramingError("receive buffer does not cover the pilot window");
    std::copy_n(rx[m].begin() + static_cast<std::ptrdiff_t>(pilot_offset), nzc, window.begin());
    for (std::size_t n = 0; n < path_count; ++n) {
      cplx acc{0.0, 0.0};
      for (std::size_t i = 0; i < nzc; ++i) acc += window[(i + n) % nzc] * std::conj(p[i]);
      taps(m, n) = acc / static_cast<double>(nzc);
    }
    // residual after removing the fitted cyclic convolution h_hat (*) p
    std::fill(rebuilt.begin(), rebuilt.end(), cplx{0.0, 0.0});
    for (std::size_t n = 0; n < path_count; ++n) {
      const cplx h = taps(m, n);
      for (std::size_t i = 0; i < nzc; ++i) rebuilt[(i + n) % nzc] += h * p[i];
    }
    for (std::size_t i = 0; i < nzc; ++i) residual += std::norm(window[i] - rebuilt[i]);
  }
  const double dof = static_cast<double>(rx.size()) * static_cast<double>(nzc - path_count);
  const double noise_power = dof > 0.0 ? residual / dof : 0.0;
  return ChannelEstimate{std::move(taps), pilot.root(), noise_power / static_cast<double>(nzc)};
}

RakeOutput rake_receive(const AntennaSignals& rx, const ChannelEstimate& est, const waveform::BurstLayout& layout) {
  const auto& h = est.taps;
  if (rx.size() != h.antenna_count()) throw ConfigError("RAKE: antenna count differs from estimate");
  const std::size_t n_paths = h.path_count();
  const std::size_t spacing = layout.symbol_spacing;
  if (spacing == 0) throw ConfigError("symbol spacing must be >= 1");
  RakeOutput out;
  out.soft_symbols.assign(layout.data_len, cplx{0.0, 0.0});
  out.per_antenna_peak.assign(rx.size(), 0.0);
  if (layout.data_len == 0) return out;
  const std::size_t needed = layout.data_offset() + (layout.data_len - 1) * spacing + n_paths;
  for (std::size_t m = 0; m < rx.size(); ++m) {
    if (rx[m].size() < needed) throw FramingError("RAKE: receive buffer shorter than burst plus channel");
    const std::span<const cplx> row(rx[m]);
    double peak = 0.0;
    for (std::size_t s = 0; s < layout.data_len; ++s) {
      const cplx z = dot_conj(h.row(m), row.subspan(layout.data_offset() + s * spacing, n_paths));
      out.soft_symbols[s] += z;
      peak = std::max(peak, std::abs(z));
    }
    out.per_antenna_peak[m] = peak;
  }
  return out;
}

channel::PowerDelayProfile estimate_pdp(const ChannelEstimate& est) {
  const auto& h = est.taps;
  std::vector<double> pdp(h.path_count(), 0.0);
  for (std::size_t m = 0; m < h.antenna_count(); ++m) {
    for (std::size_t n = 0; n < h.path_count(); ++n) pdp[n] += std::norm(h(m, n));
  }
  for (auto& p : pdp) p /= static_cast<double>(h.antenna_count());
  return channel::PowerDelayProfile(std::move(pdp));
}

SinrEstimate estimate_sinr(const ChannelEstimate& est, const AntennaSignals& rx, std::size_t pilot_offset,
                           std::size_t pilot_len, const SinrEstimatorConfig& cfg) {
  if (rx.size() != est.taps.antenna_count()) throw ConfigError("SINR: antenna count differs from estimate");
  if (pilot_len == 0) throw ConfigError("SINR: empty pilot window");
  SinrEstimate r;
  r.signal_power = est.taps.total_energy() / static_cast<double>(est.taps.antenna_count());
  double rx_power = 0.0;
  for (const auto& row : rx) {
    if (row.size() < pilot_offset + pilot_len) throw FramingError("SINR: receive buffer does not cover the pilot window");
    rx_power += energy(std::span<const cplx>(row).subspan(pilot_offset, pilot_len));
  }
  r.received_power = rx_power / static_cast<double>(rx.size() * pilot_len);
  if (r.signal_power <= 0.0) return r;
  const double floor = r.signal_power * db_to_linear(-cfg.ceiling_db);
  r.sinr = r.signal_power / std::max(r.received_power - r.signal_power, floor);
  r.raw_sinr = r.signal_power / std::max(r.received_power, floor);
  return r;
}

std::size_t timing_advance_from_pdp(const channel::PowerDelayProfile& pdp, double threshold) {
  const auto taps = pdp.tap_powers();
  const double peak = *std::max_element(taps.begin(), taps.end());
  if (peak <= 0.0) throw DegenerateInputError("timing advance: all-zero power delay profile");
  for (std::size_t n = 0; n < taps.size(); ++n) {
    if (taps[n] >= threshold * peak) return n;
  }
  return 0;  // unreachable: the peak itself satisfies the test for threshold <= 1
}

CVec combined_correlation(const channel::ChannelMatrix& desired, const channel::ChannelMatrix& other) {
  if (desired.antenna_count() != other.antenna_count() || desired.path_count() != other.path_count()) {
    throw ConfigError("combined_correlation: dimension mismatch");
  }
  const std::ptrdiff_t n_paths = static_cast<std::ptrdiff_t>(desired.path_count());
  CVec r(2 * desired.path_count() - 1, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < desired.antenna_count(); ++m) {
    const auto d = desired.row(m);
    const auto o = other.row(m);
    for (std::ptrdiff_t l = -(n_paths - 1); l <= n_paths - 1; ++l) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -l);
      const std::ptrdiff_t hi = std::min(n_paths, n_paths - l);
      r[static_cast<std::size_t>(l + n_paths - 1)] +=
          dot_conj(d.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)),
                   o.subspan(static_cast<std::size_t>(lo + l), static_cast<std::size_t>(hi - lo)));
    }
  }
  return r;
}

}  // namespace mdma::uplink
