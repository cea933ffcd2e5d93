#include "mdma/beacon.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mdma/fft.hpp"

namespace mdma::control {

void BeaconConfig::validate() const {
  if (fft_size < 8 || !std::has_single_bit(fft_size)) throw ConfigError("beacon FFT size must be a power of two >= 8");
  if (num_cells == 0 || scts_per_cell == 0) throw ConfigError("beacon needs X >= 1 cells and K >= 1 SCTs per cell");
  if (cp_len == 0 || cp_len >= fft_size) throw ConfigError("cyclic prefix must be in [1, fft_size)");
  if (window_backoff > cp_len) throw ConfigError("window backoff cannot exceed the cyclic prefix");
  if (!(pct_amplitude > 0.0)) throw ConfigError("PCT amplitude must be positive");
  const int half = static_cast<int>(fft_size / 2);
  const int lo = -half + static_cast<int>(guard_bins);
  const int hi = half - 1 - static_cast<int>(guard_bins);
  if (lo >= hi) throw ConfigError("guard bands leave no usable bins");
  const int pct = pct_physical_bin();
  if (pct == 0) throw ConfigError("PCT cannot sit on the DC bin");
  const int last = physical_bin(logical_count() - 1);
  if (pct < lo || last > hi) {
    throw ConfigError("K*X+1 control tones do not fit between the guard bands");
  }
}

int BeaconConfig::pct_physical_bin() const {
  if (pct_bin) return *pct_bin;
  return -static_cast<int>(fft_size / 2) + static_cast<int>(guard_bins);
}

int BeaconConfig::physical_bin(std::size_t logical) const {
  const int pct = pct_physical_bin();
  int bin = pct + static_cast<int>(logical);
  if (pct < 0 && bin >= 0) ++bin;  // skip DC
  return bin;
}

std::vector<int> BeaconConfig::guard_band_bins() const {
  std::vector<int> bins;
  const int half = static_cast<int>(fft_size / 2);
  for (int g = 0; g < static_cast<int>(guard_bins); ++g) {
    bins.push_back(-half + g);
    bins.push_back(half - 1 - g);
  }
  return bins;
}

std::vector<std::size_t> sct_subcarriers(std::size_t cell_id, const BeaconConfig& cfg) {
  if (cell_id < 1 || cell_id > cfg.num_cells) {
    throw ConfigError("cell id " + std::to_string(cell_id) + " outside 1.." + std::to_string(cfg.num_cells));
  }
  std::vector<std::size_t> idx(cfg.scts_per_cell);
  for (std::size_t j = 0; j < cfg.scts_per_cell; ++j) idx[j] = cell_id + j * cfg.num_cells;
  return idx;
}

CVec beacon_spectrum(std::size_t cell_id, cplx dpsk_symbol, const BeaconConfig& cfg, bool include_pct) {
  cfg.validate();
  CVec spec(cfg.fft_size, cplx{0.0, 0.0});
  if (include_pct) spec[dsp::bin_index(cfg.pct_physical_bin(), cfg.fft_size)] = cfg.pct_amplitude;
  for (auto logical : sct_subcarriers(cell_id, cfg)) {
    spec[dsp::bin_index(cfg.physical_bin(logical), cfg.fft_size)] = dpsk_symbol;
  }
  return spec;
}

waveform::BasebandSignal build_beacon_symbol(std::size_t cell_id, cplx dpsk_symbol, const BeaconConfig& cfg,
                                             bool include_pct) {
  const CVec body = dsp::ifft(beacon_spectrum(cell_id, dpsk_symbol, cfg, include_pct));
  waveform::BasebandSignal sig;
  sig.samples.reserve(cfg.symbol_length());
  sig.samples.insert(sig.samples.end(), body.end() - static_cast<std::ptrdiff_t>(cfg.cp_len), body.end());
  sig.samples.insert(sig.samples.end(), body.begin(), body.end());
  return sig;
}

CVec build_beacon_stream(std::size_t cell_id, std::span<const cplx> dpsk_symbols, const BeaconConfig& cfg,
                         bool include_pct) {
  CVec out;
  out.reserve(dpsk_symbols.size() * cfg.symbol_length());
  for (const auto& d : dpsk_symbols) {
    const auto sym = build_beacon_symbol(cell_id, d, cfg, include_pct);
    out.insert(out.end(), sym.samples.begin(), sym.samples.end());
  }
  return out;
}

CVec apply_frequency_offset(std::span<const cplx> x, double cfo, std::size_t start_index) {
  CVec out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    // fold the phase to keep the argument small for long streams
    const double cycles = cfo * static_cast<double>(n + start_index);
    const double frac = cycles - std::floor(cycles);
    out[n] = x[n] * std::polar(1.0, 2.0 * kPi * frac);
  }
  return out;
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_le_float(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, sizeof u);
  const char bytes[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                         static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
  os.write(bytes, 4);
}

float get_le_float(const unsigned char* b) {
  const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                          (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  float v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

}  // namespace

void write_iq(const std::filesystem::path& path, std::span<const cplx> samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  for (const auto& s : samples) {
    put_le_float(os, static_cast<float>(s.real()));
    put_le_float(os, static_cast<float>(s.imag()));
  }
}

CVec read_iq(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (raw.size() % 8 != 0) throw FramingError("I/Q file length is not a multiple of 8 bytes");
  CVec out(raw.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {get_le_float(&raw[8 * i]), get_le_float(&raw[8 * i + 4])};
  }
  return out;
}

}  // namespace mdma::control
