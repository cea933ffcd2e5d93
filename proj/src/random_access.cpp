#include "mdma/random_access.hpp"

#include <boost/crc.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "mdma/downlink_phy.hpp"
#include "mdma/waveform.hpp"

namespace mdma::mac {

void RachConfig::validate() const {
  if (zc_length < 3 || zc_length % 2 == 0) throw ConfigError("RACH ZC length must be odd and >= 3");
  if (path_count < 1) throw ConfigError("RACH path count must be >= 1");
  if (window() > zc_length) throw ConfigError("RACH estimate window exceeds the ZC length");
  if (!(false_alarm_target > 0.0 && false_alarm_target < 1.0)) throw ConfigError("false-alarm target must be in (0, 1)");
  if (!(relative_floor >= 0.0 && relative_floor <= 1.0)) throw ConfigError("relative floor must be in [0, 1]");
}

CVec rach_burst(unsigned root, const RachConfig& cfg) {
  const auto zc = waveform::zc_generate(root, cfg.zc_length);
  const auto s = zc.samples();
  CVec out(s.end() - static_cast<std::ptrdiff_t>(cfg.cp_len()), s.end());
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

double rach_statistic(const uplink::ChannelEstimate& est, double noise_power, const RachConfig& cfg) {
  if (!(noise_power > 0.0)) throw ConfigError("RACH detection needs a positive noise power");
  return static_cast<double>(cfg.zc_length) * est.taps.total_energy() / noise_power;
}

double calibrate_rach_threshold(const RachConfig& cfg, std::size_t antenna_count, std::span<const unsigned> roots,
                                std::size_t trials, std::uint64_t seed) {
  cfg.validate();
  if (trials == 0 || roots.empty()) throw ConfigError("calibration needs trials >= 1 and at least one root");
  std::vector<waveform::ZcSequence> pilots;
  for (auto r : roots) pilots.push_back(waveform::zc_generate(r, cfg.zc_length));
  std::vector<double> peak(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, "rach-calibration", t));
    AntennaSignals rx(antenna_count, CVec(cfg.burst_length(), cplx{0.0, 0.0}));
    add_awgn(rx, 1.0, rng);
    double best = 0.0;
    for (const auto& p : pilots) {
      const auto est = uplink::estimate_channel(rx, p, cfg.window(), cfg.cp_len());
      best = std::max(best, rach_statistic(est, 1.0, cfg));
    }
    peak[t] = best;
  });
  std::sort(peak.begin(), peak.end());
  const auto idx = static_cast<std::size_t>(
      std::ceil((1.0 - cfg.false_alarm_target) * static_cast<double>(trials)));
  return peak[std::min(idx, trials - 1)];
}

std::vector<RachDetection> detect_rach(const AntennaSignals& rx, std::span<const unsigned> roots,
                                       const RachConfig& cfg, double noise_power, double threshold) {
  cfg.validate();
  std::vector<RachDetection> all;
  double best = 0.0;
  const double antennas = static_cast<double>(rx.size());
  for (auto r : roots) {
    RachDetection d;
    d.root = r;
    d.estimate = uplink::estimate_channel(rx, waveform::zc_generate(r, cfg.zc_length), cfg.window(), cfg.cp_len());
    d.statistic = rach_statistic(d.estimate, noise_power, cfg);
    best = std::max(best, d.statistic);
    all.push_back(std::move(d));
  }
  const double n_zc = static_cast<double>(cfg.zc_length);
  const double noise_energy = antennas * static_cast<double>(cfg.window()) * noise_power / n_zc;
  std::vector<RachDetection> out;
  for (auto& d : all) {
    if (d.statistic <= threshold || d.statistic < cfg.relative_floor * best) continue;
    const double signal = std::max(d.estimate.taps.total_energy() - noise_energy, 1e-300);
    d.rx_power_db = linear_to_db(signal / antennas);
    out.push_back(std::move(d));
  }
  // Another root leaks E / N_zc into every tap of this estimate (flat ZC cross-correlation),
  // noise adds noise / N_zc. The floor is removed before the first-path search.
  for (auto& d : out) {
    double floor = noise_power / n_zc;
    for (const auto& o : out) {
      if (o.root != d.root) floor += db_to_linear(o.rx_power_db) / n_zc;
    }
    const auto pdp = uplink::estimate_pdp(d.estimate);
    std::vector<double> taps(pdp.tap_powers().begin(), pdp.tap_powers().end());
    for (auto& p : taps) p = std::max(p - floor, 0.0);
    const bool empty = std::all_of(taps.begin(), taps.end(), [](double p) { return p == 0.0; });
    d.timing = uplink::timing_advance_from_pdp(empty ? pdp : channel::PowerDelayProfile(std::move(taps)), 0.1);
  }
  return out;
}

std::vector<RachOutcome> resolve_random_access(std::span<const RachAttempt> attempts,
                                               const std::vector<RachDetection>& detections) {
  std::map<unsigned, std::size_t> uses;
  for (const auto& a : attempts) ++uses[a.root];
  std::vector<RachOutcome> out;
  out.reserve(attempts.size());
  for (const auto& a : attempts) {
    RachOutcome o;
    o.root = a.root;
    if (uses[a.root] > 1) {
      o.kind = RachOutcomeKind::Collision;
    } else {
      const auto it = std::find_if(detections.begin(), detections.end(), [&](const auto& d) { return d.root == a.root; });
      if (it != detections.end()) {
        o.kind = RachOutcomeKind::Detected;
        o.timing = it->timing;
        o.rx_power_db = it->rx_power_db;
      }
    }
    out.push_back(o);
  }
  return out;
}

namespace {

void put_byte(Bits& out, std::uint8_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> i) & 1u));
}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  boost::crc_ccitt_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return static_cast<std::uint16_t>(crc.checksum());
}

}  // namespace

Bits encode_ack(const AckMessage& ack) {
  const std::uint8_t bytes[4] = {ack.rach_root, ack.dedicated_root, ack.timing_advance,
                                 static_cast<std::uint8_t>(ack.power_correction_db)};
  Bits bits;
  bits.reserve(AckMessage::kBits);
  for (auto b : bytes) put_byte(bits, b);
  const std::uint16_t crc = crc16(bytes);
  put_byte(bits, static_cast<std::uint8_t>(crc >> 8));
  put_byte(bits, static_cast<std::uint8_t>(crc & 0xff));
  return bits;
}

std::optional<AckMessage> decode_ack(std::span<const std::uint8_t> bits) {
  if (bits.size() != AckMessage::kBits) return std::nullopt;
  std::uint8_t bytes[6] = {};
  for (std::size_t i = 0; i < bits.size(); ++i) bytes[i / 8] = static_cast<std::uint8_t>((bytes[i / 8] << 1) | (bits[i] & 1u));
  const std::uint16_t crc = static_cast<std::uint16_t>((bytes[4] << 8) | bytes[5]);
  if (crc != crc16(std::span<const std::uint8_t>(bytes, 4))) return std::nullopt;
  return AckMessage{bytes[0], bytes[1], bytes[2], static_cast<std::int8_t>(bytes[3])};
}

AntennaSignals transmit_ack(const AckMessage& ack, const uplink::ChannelEstimate& est, std::size_t symbol_spacing) {
  const auto w = downlink::prerake_weights(est);
  return downlink::transmit_downlink(encode_ack(ack), w, symbol_spacing);
}

std::optional<AckMessage> receive_ack(std::span<const cplx> rx, std::size_t estimate_window,
                                      std::size_t symbol_spacing) {
  try {
    const Bits bits = downlink::user_receive(rx, estimate_window - 1, AckMessage::kBits, symbol_spacing);
    return decode_ack(bits);
  } catch (const FramingError&) {
    return std::nullopt;
  }
}

}  // namespace mdma::mac
