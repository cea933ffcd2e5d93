#include "mdma/waveform.hpp"

#include <cmath>
#include <numeric>

namespace mdma::waveform {

ZcSequence::ZcSequence(unsigned root, std::size_t length) : root_(root) {
  if (length == 0 || length % 2 == 0) throw ConfigError("ZC length must be odd");
  if (root == 0 || root >= length) throw ConfigError("ZC root must satisfy 1 <= q < N");
  if (std::gcd(static_cast<std::size_t>(root), length) != 1) throw ConfigError("ZC root must be coprime with length");
  samples_.resize(length);
  const std::uint64_t n_zc = length;
  for (std::uint64_t n = 0; n < n_zc; ++n) {
    // reduce q*n*(n+1)/2 modulo N exactly; n*(n+1) is even so the half is an integer
    const std::uint64_t tri = (n * (n + 1) / 2) % n_zc;
    const std::uint64_t k = (static_cast<std::uint64_t>(root) * tri) % n_zc;
    const double phase = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_zc);
    samples_[n] = std::polar(1.0, phase);
  }
}

ZcSequence zc_generate(unsigned root, std::size_t length) { return ZcSequence(root, length); }

CVec periodic_cross_correlation(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw ConfigError("periodic correlation needs equal lengths");
  const std::size_t n = a.size();
  CVec c(n);
  for (std::size_t l = 0; l < n; ++l) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * std::conj(b[(i + l) % n]);
    c[l] = acc;
  }
  return c;
}

std::vector<int> barker_header(std::size_t length) {
  switch (length) {
    case 7: return {+1, +1, +1, -1, -1, +1, -1};
    case 11: return {+1, +1, +1, -1, -1, -1, +1, -1, -1, +1, -1};
    case 13: return {+1, +1, +1, +1, +1, -1, -1, +1, +1, -1, +1, -1, +1};
    default: throw ConfigError("unsupported Barker length " + std::to_string(length) + " (use 7, 11 or 13)");
  }
}

CVec bpsk_map(std::span<const std::uint8_t> bits) {
  CVec out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? -1.0 : 1.0;
  return out;
}

std::uint8_t bpsk_decide(cplx soft) { return soft.real() < 0.0 ? 1 : 0; }

Bits bpsk_hard_decide(std::span<const cplx> soft) {
  Bits out(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) out[i] = bpsk_decide(soft[i]);
  return out;
}

CVec dpsk_encode(std::span<const std::uint8_t> bits, cplx reference) {
  if (std::abs(std::abs(reference) - 1.0) > 1e-9) throw ConfigError("DPSK reference must be unit-modulus");
  if (bits.empty()) return {};
  CVec out;
  out.reserve(bits.size() + 1);
  out.push_back(reference);
  for (auto b : bits) out.push_back(out.back() * (b ? -1.0 : 1.0));
  return out;
}

Bits dpsk_decode(std::span<const cplx> symbols) {
  if (symbols.size() < 2) return {};
  Bits out(symbols.size() - 1);
  for (std::size_t i = 1; i < symbols.size(); ++i) out[i - 1] = bpsk_decide(symbols[i] * std::conj(symbols[i - 1]));
  return out;
}

CVec BasebandSignal::scaled() const {
  CVec out = samples;
  for (auto& s : out) s *= scale;
  return out;
}

UplinkBurst::UplinkBurst(const ZcSequence& pilot, std::span<const std::uint8_t> bits, BurstOptions options)
    : pilot_root_(pilot.root()), data_symbols_(bpsk_map(bits)) {
  if (options.symbol_spacing == 0) throw ConfigError("symbol spacing must be >= 1");
  if (options.cp_len > pilot.length()) throw ConfigError("pilot cyclic prefix longer than pilot");
  layout_ = {options.cp_len, pilot.length(), bits.size(), options.symbol_spacing};
  auto& s = signal_.samples;
  s.assign(layout_.length(), cplx{0.0, 0.0});
  const auto p = pilot.samples();
  for (std::size_t i = 0; i < options.cp_len; ++i) s[i] = p[p.size() - options.cp_len + i];
  std::copy(p.begin(), p.end(), s.begin() + static_cast<std::ptrdiff_t>(options.cp_len));
  for (std::size_t k = 0; k < data_symbols_.size(); ++k) s[layout_.data_offset() + k * options.symbol_spacing] = data_symbols_[k];
}

UplinkBurst assemble_uplink_burst(const ZcSequence& pilot, std::span<const std::uint8_t> bits, BurstOptions options) {
  return UplinkBurst(pilot, bits, options);
}

BasebandSignal assemble_data_burst(std::span<const std::uint8_t> bits, std::size_t symbol_spacing) {
  if (symbol_spacing == 0) throw ConfigError("symbol spacing must be >= 1");
  BasebandSignal sig;
  sig.samples.assign(bits.size() * symbol_spacing, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < bits.size(); ++k) sig.samples[k * symbol_spacing] = bits[k] ? -1.0 : 1.0;
  return sig;
}

}  // namespace mdma::waveform
