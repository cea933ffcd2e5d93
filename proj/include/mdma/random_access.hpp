#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mdma/common.hpp"
#include "mdma/uplink_phy.hpp"

namespace mdma::mac {

/// Random-access burst: [cyclic prefix | ZC pilot]. The BS estimates a window of
/// path_count + max_delay taps so an unaligned user's whole response fits; the cyclic
/// prefix is one sample shorter than the window.
struct RachConfig {
  std::size_t zc_length = 139;
  std::size_t path_count = 16;
  std::size_t max_delay = 8;
  double false_alarm_target = 0.01;
  /// A root is detected only if its statistic is at least this fraction of the largest one.
  double relative_floor = 0.5;

  void validate() const;
  std::size_t window() const { return path_count + max_delay; }
  std::size_t cp_len() const { return window() - 1; }
  std::size_t burst_length() const { return cp_len() + zc_length; }
};

CVec rach_burst(unsigned root, const RachConfig& cfg);

/// Normalized detection statistic of one root: N_zc * sum |h_hat|^2 / noise_power.
/// On noise-only input it is Gamma(M * window, 1) distributed.
double rach_statistic(const uplink::ChannelEstimate& est, double noise_power, const RachConfig& cfg);

/// Noise-only Monte Carlo calibration: the (1 - false_alarm_target) quantile of the largest
/// statistic over all candidate roots, over `trials` seeded draws.
double calibrate_rach_threshold(const RachConfig& cfg, std::size_t antenna_count, std::span<const unsigned> roots,
                                std::size_t trials, std::uint64_t seed);

struct RachDetection {
  unsigned root = 0;
  double statistic = 0.0;
  /// First estimated tap reaching 10% of the strongest once the noise and the leakage of the
  /// other detected roots are subtracted (timing-advance value).
  std::size_t timing = 0;
  /// Estimated received power per antenna, noise energy removed (dB).
  double rx_power_db = 0.0;
  uplink::ChannelEstimate estimate;
};

/// Correlates every candidate root; returns the roots whose statistic exceeds `threshold`
/// and the relative floor, in candidate order. `rx` must hold burst_length samples per antenna.
std::vector<RachDetection> detect_rach(const AntennaSignals& rx, std::span<const unsigned> roots,
                                       const RachConfig& cfg, double noise_power, double threshold);

enum class RachOutcomeKind { Detected, Missed, Collision };

struct RachAttempt {
  std::size_t ue = 0;
  unsigned root = 0;
};

struct RachOutcome {
  RachOutcomeKind kind = RachOutcomeKind::Missed;
  unsigned root = 0;
  std::size_t timing = 0;
  double rx_power_db = 0.0;
};

/// Per attempt: Collision if another attempt in the same slot used the same root (no
/// capture), otherwise Detected when the BS detected the root and Missed when it did not.
std::vector<RachOutcome> resolve_random_access(std::span<const RachAttempt> attempts,
                                               const std::vector<RachDetection>& detections);

/// Acknowledgement: the random-access root it answers, the dedicated pilot root, the
/// timing advance in samples and the initial power correction in dB, followed by a
/// CRC-16/CCITT-FALSE. 48 bits, most-significant bit first.
struct AckMessage {
  std::uint8_t rach_root = 0;
  std::uint8_t dedicated_root = 0;
  std::uint8_t timing_advance = 0;
  std::int8_t power_correction_db = 0;

  static constexpr std::size_t kBits = 48;
  bool operator==(const AckMessage&) const = default;
};

Bits encode_ack(const AckMessage& ack);
std::optional<AckMessage> decode_ack(std::span<const std::uint8_t> bits);

/// Pre-RAKE downlink transmission of the ack, one BPSK symbol every `symbol_spacing` samples.
AntennaSignals transmit_ack(const AckMessage& ack, const uplink::ChannelEstimate& est, std::size_t symbol_spacing);

/// User side: samples the received stream at the effective-channel peak
/// (estimate window - 1) and every symbol_spacing samples after it.
std::optional<AckMessage> receive_ack(std::span<const cplx> rx, std::size_t estimate_window,
                                      std::size_t symbol_spacing);

}  // namespace mdma::mac
