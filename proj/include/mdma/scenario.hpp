#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdma/beacon.hpp"
#include "mdma/control_frame.hpp"
#include "mdma/mac_protocol.hpp"
#include "mdma/random_access.hpp"

namespace mdma::sim {

struct SirKnobs {
  /// Measured data symbols per trial (2(N-1) edge symbols are added around them).
  std::size_t symbols = 64;
};

struct HardeningKnobs {
  std::vector<std::size_t> antenna_counts{16, 64, 256};
  /// Independent seed replicas; the reported std per M is the median over replicas.
  std::size_t seed_replicas = 5;
  /// When set, K = max(2, round(users_per_antenna * M)); otherwise K = user_count.
  std::optional<double> users_per_antenna;
  /// Measured data symbols per trial. The MUI average over S symbols carries a spread of
  /// about 4.3 / sqrt(S) dB that does not shrink with M, so this is larger than sir.symbols.
  std::size_t symbols = 1024;
};

struct BerKnobs {
  std::vector<double> snr_db{0.0, 4.0, 8.0, 9.6};
  std::size_t bits_per_trial = 10000;
  /// Samples between data symbols; spacing >= N keeps the single user free of ISI.
  std::size_t symbol_spacing = 0;  // 0 = path count
  bool estimated_csi = false;
  double pilot_power_offset_db = 0.0;
  std::size_t zc_length = 139;
};

struct SpeffKnobs {
  std::size_t symbols = 64;
};

struct BeaconKnobs {
  control::BeaconConfig beacon;
  control::ControlFrameLayout layout;
  /// Per-sample SNR of the home-cell beacon; noiseless when absent.
  std::optional<double> snr_db = 10.0;
  /// Channel taps of the beacon link (must stay within cp_len - window_backoff + 1). Every
  /// realization is scaled to unit energy, so SNR and interferer level are realized values.
  std::size_t path_count = 1;
  std::string pdp = "exp:1.5";
  std::size_t frames = 2;
  /// Fixed timing offset; random in [0, symbol_length) when absent.
  std::optional<std::size_t> timing_offset;
  /// Fractional CFO in bins; uniform in [-0.5, 0.5) when absent.
  std::optional<double> fractional_cfo_bins;
  int integer_cfo_bins = 0;
  /// Home cell; random in 1..X when absent.
  std::optional<std::size_t> cell_id;
  /// Power of one interfering cell relative to the home cell (dB); none when absent.
  std::optional<double> interferer_db = -10.0;
  control::BroadcastInfo bch{20, {25, 34, 47, 58}, -20};
  control::PagingInfo pch{{7, 12}};
};

struct CallSetupKnobs {
  std::size_t ue_count = 1;
  /// Number of initial random-access attempts on which all UEs are forced onto the same root.
  std::size_t forced_collisions = 0;
  double beacon_tx_power_db = 30.0;
  double path_loss_db = 40.0;
  double noise_power_db = -30.0;
  /// Overrides the beacon-link SNR implied by the powers above.
  std::optional<double> beacon_snr_db;
  double target_rach_power_db = -20.0;
  double target_sinr_db = 10.0;
  double power_step_db = 1.0;
  std::size_t dedicated_subframes = 8;
  std::size_t max_subframes = 400;
  std::size_t calibration_trials = 400;
  mac::RachConfig rach;
  mac::PowerBounds power_bounds;
  mac::RetryPolicy retry;
  mac::FrameConfig frame;
};

/// One simulation scenario. Parsed from strict JSON: unknown keys and wrong types are
/// configuration errors.
struct Scenario {
  std::size_t antenna_count = 64;
  std::size_t user_count = 2;
  std::size_t path_count = 16;
  std::string pdp = "uniform";
  double other_cell_factor = 0.0;
  double noise_power = 0.0;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;

  SirKnobs sir;
  HardeningKnobs hardening;
  BerKnobs ber;
  SpeffKnobs speff;
  BeaconKnobs beacon;
  CallSetupKnobs callsetup;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
  static Scenario from_file(const std::filesystem::path& path);
};

}  // namespace mdma::sim
