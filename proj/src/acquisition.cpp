#include "mdma/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdma/fft.hpp"
#include "mdma/waveform.hpp"

namespace mdma::control {

SyncResult cp_synchronize(std::span<const cplx> rx, const BeaconConfig& cfg, double rho) {
  cfg.validate();
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("cp_synchronize: rho must lie in [0, 1]");
  const std::size_t L = cfg.symbol_length();
  const std::size_t N = cfg.fft_size;
  if (rx.size() < 2 * L - 1) throw FramingError("cp_synchronize: need at least one whole symbol at every offset");
  const std::size_t symbols = (rx.size() - (L - 1)) / L;

  SyncResult best;
  double best_metric = -std::numeric_limits<double>::infinity();
  cplx best_p{0.0, 0.0};
  for (std::size_t theta = 0; theta < L; ++theta) {
    cplx p{0.0, 0.0};
    double e = 0.0;
    for (std::size_t s = 0; s < symbols; ++s) {
      const std::size_t base = theta + s * L;
      for (std::size_t k = 0; k < cfg.cp_len; ++k) {
        const cplx a = rx[base + k];
        const cplx b = rx[base + k + N];
        p += std::conj(a) * b;
        e += 0.5 * (std::norm(a) + std::norm(b));
      }
    }
    const double mag = std::abs(p);
    if (mag - rho * e > best_metric) {
      best_metric = mag - rho * e;
      best_p = p;
      best.symbol_timing = theta;
      best.confidence = e > 0.0 ? mag / e : 0.0;
    }
  }
  best.fractional_cfo = std::arg(best_p) / (2.0 * kPi * static_cast<double>(N));
  return best;
}

CVec correct_cfo(std::span<const cplx> rx, double cfo) { return apply_frequency_offset(rx, -cfo, 0); }

std::vector<CVec> demodulate_symbols(std::span<const cplx> rx, std::size_t timing, const BeaconConfig& cfg) {
  const std::size_t L = cfg.symbol_length();
  const std::size_t lead = cfg.cp_len - cfg.window_backoff;
  std::vector<CVec> spectra;
  for (std::size_t start = timing + lead; start + cfg.fft_size <= rx.size(); start += L) {
    spectra.push_back(dsp::fft(rx.subspan(start, cfg.fft_size)));
  }
  return spectra;
}

int integer_cfo(const std::vector<CVec>& spectra, const BeaconConfig& cfg, int search_window) {
  if (search_window < 0) throw ConfigError("integer CFO search window must be >= 0");
  const int pct = cfg.pct_physical_bin();
  int best = 0;
  double best_p = -1.0;
  // scan outward from zero so ties prefer the smallest offset
  for (int step = 0; step <= 2 * search_window; ++step) {
    const int d = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
    const std::size_t bin = dsp::bin_index(pct + d, cfg.fft_size);
    double p = 0.0;
    for (const auto& s : spectra) p += std::norm(s[bin]);
    if (p > best_p) {
      best_p = p;
      best = d;
    }
  }
  return best;
}

int integer_cfo(std::span<const cplx> rx, std::size_t timing, const BeaconConfig& cfg, int search_window) {
  return integer_cfo(demodulate_symbols(rx, timing, cfg), cfg, search_window);
}

std::vector<CellPower> cell_search(const std::vector<CVec>& spectra, const BeaconConfig& cfg) {
  std::vector<CellPower> out;
  const double count = spectra.empty() ? 1.0 : static_cast<double>(spectra.size());
  for (std::size_t cell = 1; cell <= cfg.num_cells; ++cell) {
    double p = 0.0;
    for (auto logical : sct_subcarriers(cell, cfg)) {
      const std::size_t bin = dsp::bin_index(cfg.physical_bin(logical), cfg.fft_size);
      for (const auto& s : spectra) p += std::norm(s[bin]);
    }
    out.push_back({cell, p / count});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.power > b.power; });
  return out;
}

Bits decode_cell_bits(const std::vector<CVec>& spectra, std::size_t cell_id, const BeaconConfig& cfg) {
  std::vector<std::size_t> bins;
  for (auto logical : sct_subcarriers(cell_id, cfg)) bins.push_back(dsp::bin_index(cfg.physical_bin(logical), cfg.fft_size));
  Bits bits;
  if (spectra.size() < 2) return bits;
  bits.reserve(spectra.size() - 1);
  for (std::size_t t = 1; t < spectra.size(); ++t) {
    cplx z{0.0, 0.0};
    for (auto b : bins) z += spectra[t][b] * std::conj(spectra[t - 1][b]);
    bits.push_back(static_cast<std::uint8_t>(z.real() < 0.0));
  }
  return bits;
}

CVec control_symbols(std::span<const std::uint8_t> frame_bits, std::size_t frames) {
  const CVec one = waveform::dpsk_encode(frame_bits, {1.0, 0.0});
  CVec out;
  out.reserve(one.size() * frames);
  for (std::size_t f = 0; f < frames; ++f) out.insert(out.end(), one.begin(), one.end());
  return out;
}

AcquisitionResult acquire(std::span<const cplx> rx, const BeaconConfig& cfg, const ControlFrameLayout& layout,
                          const AcquisitionOptions& options) {
  AcquisitionResult res;
  try {
    res.sync = cp_synchronize(rx, cfg, options.sync_rho);
  } catch (const FramingError& e) {
    res.failure = e.what();
    return res;
  }
  const CVec coarse = correct_cfo(rx, res.sync.fractional_cfo);
  res.sync.integer_cfo = integer_cfo(coarse, res.sync.symbol_timing, cfg, options.integer_search_window);

  const CVec fine = correct_cfo(rx, res.sync.total_cfo(cfg.fft_size));
  const auto spectra = demodulate_symbols(fine, res.sync.symbol_timing, cfg);
  res.ranking = cell_search(spectra, cfg);
  res.cell_id = res.ranking.front().cell_id;

  const Bits bits = decode_cell_bits(spectra, res.cell_id, cfg);
  const auto header = waveform::barker_header(layout.header_len);
  const auto candidates = header_candidates(bits, header, options.header_threshold);
  if (candidates.empty()) {
    res.failure = "frame header not found";
    return res;
  }
  const std::span<const std::uint8_t> all(bits);
  for (const auto& c : candidates) {
    if (c.start + layout.frame_bits() > bits.size()) continue;
    const auto bch = try_decode_bch(all.subspan(c.start + layout.header_len, layout.bch_bits()), layout);
    if (!bch) continue;
    res.frame_start = c.start;
    res.bch = bch;
    try {
      res.pch = decode_pch(all.subspan(c.start + layout.header_len + layout.bch_bits(), layout.pch_bits()), layout);
    } catch (const FramingError& e) {
      res.failure = e.what();
      return res;
    }
    res.success = true;
    return res;
  }
  res.failure = "no header candidate passed the BCH checksum";
  return res;
}

}  // namespace mdma::control
