#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdma/channel_model.hpp"
#include "mdma/common.hpp"
#include "mdma/experiment_result.hpp"
#include "mdma/scenario.hpp"

namespace mdma::sim {

/// Receiver-output powers of one user's RAKE over the measured data symbols.
struct SirMeasurement {
  /// A^2 with A = sum |h|^2 (the combining gain).
  double desired_power = 0.0;
  double mui_power = 0.0;
  double other_cell_power = 0.0;
  double isi_power = 0.0;
  double noise_power = 0.0;
  /// A^2 / mean |MUI + other-cell + noise|^2
  double sir = 0.0;
  /// Same with the user's own inter-symbol interference included.
  double sir_with_isi = 0.0;
};

/// BPSK streams of every user pass their channels and the RAKE of user `desired`
/// (perfect CSI). The RAKE output at symbol s is sum_l r_k(l) x_k[s - l] with r_k the
/// combined correlation of the desired channel with user k's channel, which equals the
/// per-antenna matched filter applied to the propagated waveforms. Symbols are measured on
/// [N-1, S + N - 1) of S + 2(N-1) transmitted, so every measured symbol sees full
/// interference. Other-cell interference is complex Gaussian with variance
/// other_cell_factor * (measured MUI power); post-combining noise has variance noise * A.
SirMeasurement measure_sir(const std::vector<channel::ChannelMatrix>& users, std::size_t desired, std::size_t symbols,
                           double other_cell_factor, double noise_power, Rng& rng);

/// RAKE outputs of the desired user at the measured symbols, split into the response to its
/// own stream and to the superposition of all other streams.
struct RakeSplit {
  CVec own;
  CVec interference;
};

/// Reference path: propagates every stream through its channel and runs rake_receive.
RakeSplit rake_split_waveform(const std::vector<channel::ChannelMatrix>& users, std::size_t desired,
                              const std::vector<CVec>& streams);
/// Fast path through the combined correlations; identical up to rounding.
RakeSplit rake_split_correlation(const std::vector<channel::ChannelMatrix>& users, std::size_t desired,
                                 const std::vector<CVec>& streams);

/// sum_k log2(1 + sir_k)
double spectral_efficiency(std::span<const double> sir_linear);

/// Q(x) = 0.5 erfc(x / sqrt 2)
double q_function(double x);
/// Coherent BPSK over AWGN: Q(sqrt(2 snr)).
double bpsk_awgn_ber(double snr_linear);

struct BerTrial {
  std::size_t bits = 0;
  std::size_t errors = 0;
};

/// One single-user uplink burst at post-combining SNR `snr_linear` (infinite = noiseless).
/// The noise power is set per realization so A^2 / (sigma^2 A + ISI) equals the target.
BerTrial ber_trial(const channel::ChannelMatrix& h, const BerKnobs& knobs, double snr_linear, std::uint64_t seed);

ExperimentResult run_sir_experiment(const Scenario& sc);
ExperimentResult run_hardening_experiment(const Scenario& sc);
ExperimentResult run_ber_experiment(const Scenario& sc);
ExperimentResult run_spectral_efficiency(const Scenario& sc);
ExperimentResult run_beacon_experiment(const Scenario& sc);
ExperimentResult run_callsetup_experiment(const Scenario& sc);

/// Dispatches on sir, hardening, ber, speff, beacon or callsetup.
ExperimentResult run_experiment(const std::string& name, const Scenario& sc);

}  // namespace mdma::sim
