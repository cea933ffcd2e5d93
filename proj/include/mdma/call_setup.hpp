#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdma/mac_protocol.hpp"
#include "mdma/scenario.hpp"

namespace mdma::sim {

struct UeReport {
  bool success = false;
  mac::ReleaseCause cause = mac::ReleaseCause::None;
  unsigned sync_attempts = 0;
  unsigned rach_attempts = 0;
  unsigned collisions = 0;
  unsigned dedicated_root = 0;
  /// True first-path delay minus the timing advance received in the ack (samples).
  long timing_residual = 0;
  std::vector<double> tx_power_db;
  std::vector<double> sinr_db;
};

struct CallSetupResult {
  mac::ProtocolTrace trace;
  std::vector<UeReport> ues;
  bool success = false;
  std::size_t slots = 0;
  std::vector<std::string> failures;
};

/// Slot-clocked protocol run from base-station power on to call release for every UE:
/// beacon acquisition (CellFound, HeaderFound and BchDecoded are emitted on successive
/// downlink slots), open-loop random access on the first uplink slot after any backoff,
/// detection and ack in the same subframe, closed-loop power control in dedicated mode,
/// then CallEnd. All randomness derives from `seed`. The RACH threshold is calibrated from
/// `seed` unless given.
CallSetupResult run_call_setup(const Scenario& sc, std::uint64_t seed, std::optional<double> rach_threshold = {});

/// Noise-only Monte Carlo threshold for the broadcast RACH roots at the scenario's antenna count.
double call_setup_rach_threshold(const Scenario& sc, std::uint64_t seed);

}  // namespace mdma::sim
