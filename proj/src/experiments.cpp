#include "mdma/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mdma/acquisition.hpp"
#include "mdma/beacon.hpp"
#include "mdma/call_setup.hpp"
#include "mdma/uplink_phy.hpp"
#include "mdma/waveform.hpp"

namespace mdma::sim {

namespace {

void check_streams(const std::vector<channel::ChannelMatrix>& users, std::size_t desired,
                   const std::vector<CVec>& streams) {
  if (users.empty() || desired >= users.size()) throw ConfigError("desired user index out of range");
  if (streams.size() != users.size()) throw ConfigError("one symbol stream per user is required");
  const std::size_t n = users.front().path_count();
  const std::size_t len = streams.front().size();
  if (len < 2 * n - 1) throw ConfigError("symbol streams shorter than 2N - 1");
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (users[k].path_count() != n || users[k].antenna_count() != users.front().antenna_count()) {
      throw ConfigError("all users need the same M x N channel shape");
    }
    if (streams[k].size() != len) throw ConfigError("all symbol streams need the same length");
  }
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) { return percentile(std::move(v), 50.0); }

std::vector<channel::ChannelMatrix> draw_users(std::size_t count, std::size_t antennas,
                                               const channel::PowerDelayProfile& pdp, std::uint64_t seed) {
  std::vector<channel::ChannelMatrix> users;
  users.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    users.push_back(channel::generate_channel({antennas, pdp, derive_seed(seed, "user", k)}));
  }
  return users;
}

CVec random_bpsk(Rng& rng, std::size_t count) {
  CVec s(count);
  for (auto& v : s) v = rng.bit() ? -1.0 : 1.0;
  return s;
}

}  // namespace

RakeSplit rake_split_waveform(const std::vector<channel::ChannelMatrix>& users, std::size_t desired,
                              const std::vector<CVec>& streams) {
  check_streams(users, desired, streams);
  const std::size_t n = users.front().path_count();
  const std::size_t len = streams.front().size();
  const std::size_t m = users.front().antenna_count();
  AntennaSignals own = channel::propagate(users[desired], streams[desired]);
  AntennaSignals other(m, CVec(len + n - 1, cplx{0.0, 0.0}));
  for (std::size_t k = 0; k < users.size(); ++k) {
    if (k != desired) channel::propagate_accumulate(users[k], streams[k], 1.0, other);
  }
  const waveform::BurstLayout layout{0, 0, len, 1};
  const auto est = uplink::ChannelEstimate::perfect(users[desired]);
  const auto z_own = uplink::rake_receive(own, est, layout).soft_symbols;
  const auto z_other = uplink::rake_receive(other, est, layout).soft_symbols;
  RakeSplit out;
  out.own.assign(z_own.begin() + static_cast<std::ptrdiff_t>(n - 1), z_own.end() - static_cast<std::ptrdiff_t>(n - 1));
  out.interference.assign(z_other.begin() + static_cast<std::ptrdiff_t>(n - 1),
                          z_other.end() - static_cast<std::ptrdiff_t>(n - 1));
  return out;
}

RakeSplit rake_split_correlation(const std::vector<channel::ChannelMatrix>& users, std::size_t desired,
                                 const std::vector<CVec>& streams) {
  check_streams(users, desired, streams);
  const std::size_t n = users.front().path_count();
  const std::size_t len = streams.front().size();
  const std::size_t measured = len - 2 * (n - 1);
  RakeSplit out;
  out.own.assign(measured, cplx{0.0, 0.0});
  out.interference.assign(measured, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < users.size(); ++k) {
    const CVec r = uplink::combined_correlation(users[desired], users[k]);
    CVec& dst = k == desired ? out.own : out.interference;
    const auto& x = streams[k];
    for (std::size_t i = 0; i < measured; ++i) {
      const std::size_t s = i + n - 1;
      cplx acc{0.0, 0.0};
      // r index j corresponds to lag l = j - (N-1); symbol s - l = s + N - 1 - j
      for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[s + n - 1 - j];
      dst[i] += acc;
    }
  }
  return out;
}

SirMeasurement measure_sir(const std::vector<channel::ChannelMatrix>& users, std::size_t desired, std::size_t symbols,
                           double other_cell_factor, double noise_power, Rng& rng) {
  if (symbols == 0) throw ConfigError("measure_sir needs at least one symbol");
  const std::size_t n = users.at(desired).path_count();
  const std::size_t total = symbols + 2 * (n - 1);
  std::vector<CVec> streams;
  streams.reserve(users.size());
  for (std::size_t k = 0; k < users.size(); ++k) streams.push_back(random_bpsk(rng, total));
  const RakeSplit split = rake_split_correlation(users, desired, streams);

  const double a = users[desired].total_energy();
  SirMeasurement out;
  out.desired_power = a * a;
  const double count = static_cast<double>(symbols);
  for (std::size_t i = 0; i < symbols; ++i) out.mui_power += std::norm(split.interference[i]);
  out.mui_power /= count;
  const double oc_var = other_cell_factor * out.mui_power;
  const double noise_var = noise_power * a;

  double residual = 0.0;
  double residual_isi = 0.0;
  for (std::size_t i = 0; i < symbols; ++i) {
    const cplx desired_term = a * streams[desired][i + n - 1];
    const cplx isi = split.own[i] - desired_term;
    const cplx oc = oc_var > 0.0 ? rng.complex_normal(oc_var) : cplx{0.0, 0.0};
    const cplx nz = noise_var > 0.0 ? rng.complex_normal(noise_var) : cplx{0.0, 0.0};
    const cplx r = split.interference[i] + oc + nz;
    out.other_cell_power += std::norm(oc);
    out.noise_power += std::norm(nz);
    out.isi_power += std::norm(isi);
    residual += std::norm(r);
    residual_isi += std::norm(r + isi);
  }
  out.other_cell_power /= count;
  out.noise_power /= count;
  out.isi_power /= count;
  residual /= count;
  residual_isi /= count;
  const double inf = std::numeric_limits<double>::infinity();
  out.sir = residual > 0.0 ? out.desired_power / residual : inf;
  out.sir_with_isi = residual_isi > 0.0 ? out.desired_power / residual_isi : inf;
  return out;
}

double spectral_efficiency(std::span<const double> sir_linear) {
  double s = 0.0;
  for (double x : sir_linear) {
    if (x < 0.0) throw ConfigError("SIR must be non-negative");
    s += std::log2(1.0 + x);
  }
  return s;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bpsk_awgn_ber(double snr_linear) { return q_function(std::sqrt(2.0 * snr_linear)); }

BerTrial ber_trial(const channel::ChannelMatrix& h, const BerKnobs& knobs, double snr_linear, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = h.path_count();
  const std::size_t spacing = knobs.symbol_spacing ? knobs.symbol_spacing : n;
  const Bits bits = random_bits(rng, knobs.bits_per_trial);
  const double a = h.total_energy();
  if (a <= 0.0) throw DegenerateInputError("BER trial: all-zero channel");

  double isi = 0.0;
  if (spacing < n) {
    const CVec r = uplink::combined_correlation(h, h);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const long l = static_cast<long>(j) - static_cast<long>(n - 1);
      if (l != 0 && l % static_cast<long>(spacing) == 0) isi += std::norm(r[j]);
    }
  }
  double sigma2 = 0.0;
  if (std::isfinite(snr_linear)) {
    if (!(snr_linear > 0.0)) throw ConfigError("BER trial: SNR must be positive");
    sigma2 = std::max(a * a / snr_linear - isi, 0.0) / a;
  }

  CVec samples;
  waveform::BurstLayout layout;
  std::optional<waveform::ZcSequence> pilot;
  double pilot_amp = 1.0;
  if (knobs.estimated_csi) {
    pilot.emplace(waveform::zc_generate(1, knobs.zc_length));
    const auto burst = waveform::assemble_uplink_burst(*pilot, bits, {n - 1, spacing});
    samples = burst.signal().samples;
    layout = burst.layout();
    pilot_amp = std::pow(10.0, knobs.pilot_power_offset_db / 20.0);
    for (std::size_t i = 0; i < layout.data_offset(); ++i) samples[i] *= pilot_amp;
  } else {
    samples = waveform::assemble_data_burst(bits, spacing).samples;
    layout = {0, 0, bits.size(), spacing};
  }
  AntennaSignals rx = channel::propagate(h, samples);
  if (sigma2 > 0.0) add_awgn(rx, sigma2, rng);

  uplink::ChannelEstimate est = uplink::ChannelEstimate::perfect(h);
  if (knobs.estimated_csi) {
    est = uplink::estimate_channel(rx, *pilot, n, layout.pilot_offset());
    for (std::size_t m = 0; m < est.taps.antenna_count(); ++m) {
      for (auto& t : est.taps.row(m)) t /= pilot_amp;
    }
  }
  const Bits decided = waveform::bpsk_hard_decide(uplink::rake_receive(rx, est, layout).soft_symbols);
  BerTrial out;
  out.bits = bits.size();
  for (std::size_t i = 0; i < bits.size(); ++i) out.errors += decided[i] != bits[i];
  return out;
}

ExperimentResult run_sir_experiment(const Scenario& sc) {
  sc.validate();
  if (sc.user_count < 2) throw ConfigError("the SIR experiment needs K >= 2 (no interference to measure)");
  const auto pdp = channel::PowerDelayProfile::from_name(sc.pdp, sc.path_count);
  std::vector<SirMeasurement> res(sc.trials);
  parallel_for(sc.trials, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(sc.seed, "sir", t);
    const auto users = draw_users(sc.user_count, sc.antenna_count, pdp, ts);
    Rng rng(derive_seed(ts, "symbols"));
    res[t] = measure_sir(users, 0, sc.sir.symbols, sc.other_cell_factor, sc.noise_power, rng);
  });
  ExperimentResult out;
  out.experiment = "sir";
  out.scenario = sc.to_json();
  std::vector<double> lin;
  for (std::size_t t = 0; t < sc.trials; ++t) {
    out.add(t, "sir_db", linear_to_db(res[t].sir));
    out.add(t, "sir_linear", res[t].sir);
    out.add(t, "sir_isi_db", linear_to_db(res[t].sir_with_isi));
    lin.push_back(res[t].sir);
  }
  const double mean_db = linear_to_db(mean_of(lin));
  const double expected_db = linear_to_db(static_cast<double>(sc.antenna_count) /
                                          static_cast<double>(sc.user_count - 1) / (1.0 + sc.other_cell_factor));
  out.derived.emplace_back("mean_sir_db", mean_db);
  out.derived.emplace_back("expected_sir_db", expected_db);
  if (sc.noise_power == 0.0) {
    const bool ok = std::abs(mean_db - expected_db) <= 1.0;
    out.checks.push_back({"sir_within_1db", ok,
                          "mean " + label(mean_db) + " dB vs M/((K-1)(1+f)) " + label(expected_db) + " dB"});
  }
  return out;
}

ExperimentResult run_hardening_experiment(const Scenario& sc) {
  sc.validate();
  const auto pdp = channel::PowerDelayProfile::from_name(sc.pdp, sc.path_count);
  ExperimentResult out;
  out.experiment = "hardening";
  out.scenario = sc.to_json();
  std::vector<double> medians;
  for (auto m : sc.hardening.antenna_counts) {
    std::size_t k = sc.user_count;
    if (sc.hardening.users_per_antenna) {
      k = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(*sc.hardening.users_per_antenna *
                                                                         static_cast<double>(m))));
    }
    if (k < 2) throw ConfigError("the hardening experiment needs K >= 2");
    const std::size_t reps = sc.hardening.seed_replicas;
    std::vector<double> sir_db(reps * sc.trials);
    parallel_for(sir_db.size(), [&](std::size_t i) {
      const std::size_t r = i / sc.trials;
      const std::size_t t = i % sc.trials;
      const std::uint64_t ts = derive_seed(derive_seed(sc.seed, "replica", r), "hardening", t);
      const auto users = draw_users(k, m, pdp, ts);
      Rng rng(derive_seed(ts, "symbols"));
      sir_db[i] = linear_to_db(measure_sir(users, 0, sc.hardening.symbols, sc.other_cell_factor, sc.noise_power, rng).sir);
    });
    const std::string metric = "sir_db.M" + std::to_string(m);
    std::vector<double> stds;
    for (std::size_t r = 0; r < reps; ++r) {
      std::vector<double> v(sir_db.begin() + static_cast<std::ptrdiff_t>(r * sc.trials),
                            sir_db.begin() + static_cast<std::ptrdiff_t>((r + 1) * sc.trials));
      for (std::size_t t = 0; t < sc.trials; ++t) out.add(r * sc.trials + t, metric, v[t]);
      stds.push_back(sample_std(v));
      out.derived.emplace_back("std_db.M" + std::to_string(m) + ".replica" + std::to_string(r), stds.back());
    }
    medians.push_back(median_of(stds));
    out.derived.emplace_back("std_db.M" + std::to_string(m) + ".median", medians.back());
    out.derived.emplace_back("users.M" + std::to_string(m), static_cast<double>(k));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < medians.size(); ++i) monotone = monotone && medians[i] <= medians[i - 1];
  const bool shrinks = medians.size() < 2 || medians.back() < medians.front();
  out.checks.push_back({"std_non_increasing", monotone, "median std per M in sweep order"});
  out.checks.push_back({"std_last_below_first", shrinks,
                        label(medians.back()) + " dB vs " + label(medians.front()) + " dB"});
  return out;
}

ExperimentResult run_ber_experiment(const Scenario& sc) {
  sc.validate();
  const auto pdp = channel::PowerDelayProfile::from_name(sc.pdp, sc.path_count);
  ExperimentResult out;
  out.experiment = "ber";
  out.scenario = sc.to_json();
  for (std::size_t p = 0; p < sc.ber.snr_db.size(); ++p) {
    const double snr_db = sc.ber.snr_db[p];
    const double snr = db_to_linear(snr_db);
    std::vector<BerTrial> res(sc.trials);
    const std::uint64_t ps = derive_seed(sc.seed, "ber-point", p);
    parallel_for(sc.trials, [&](std::size_t t) {
      const std::uint64_t ts = derive_seed(ps, "trial", t);
      const auto h = channel::generate_channel({sc.antenna_count, pdp, derive_seed(ts, "channel")});
      res[t] = ber_trial(h, sc.ber, snr, derive_seed(ts, "burst"));
    });
    const std::string tag = "snr" + label(snr_db);
    double errors = 0.0;
    double bits = 0.0;
    for (std::size_t t = 0; t < sc.trials; ++t) {
      out.add(t, "ber." + tag, static_cast<double>(res[t].errors) / static_cast<double>(res[t].bits));
      errors += static_cast<double>(res[t].errors);
      bits += static_cast<double>(res[t].bits);
    }
    const double measured = errors / bits;
    const double theory = bpsk_awgn_ber(snr);
    out.derived.emplace_back("ber_total." + tag, measured);
    out.derived.emplace_back("ber_theory." + tag, theory);
    out.derived.emplace_back("ratio." + tag, measured / theory);
    if (!sc.ber.estimated_csi && theory * bits >= 20.0) {
      const double ratio = measured / theory;
      out.checks.push_back({"ber_factor2." + tag, ratio >= 0.5 && ratio <= 2.0,
                            "measured " + label(measured) + " vs Q(sqrt(2 SNR)) " + label(theory)});
    }
  }
  return out;
}

ExperimentResult run_spectral_efficiency(const Scenario& sc) {
  sc.validate();
  const auto pdp = channel::PowerDelayProfile::from_name(sc.pdp, sc.path_count);
  std::vector<std::vector<double>> sir(sc.trials);
  parallel_for(sc.trials, [&](std::size_t t) {
    const std::uint64_t ts = derive_seed(sc.seed, "speff", t);
    const auto users = draw_users(sc.user_count, sc.antenna_count, pdp, ts);
    Rng rng(derive_seed(ts, "symbols"));
    for (std::size_t k = 0; k < users.size(); ++k) {
      sir[t].push_back(measure_sir(users, k, sc.speff.symbols, sc.other_cell_factor, sc.noise_power, rng).sir);
    }
  });
  ExperimentResult out;
  out.experiment = "speff";
  out.scenario = sc.to_json();
  std::vector<double> se;
  for (std::size_t t = 0; t < sc.trials; ++t) {
    se.push_back(spectral_efficiency(sir[t]));
    out.add(t, "speff", se.back());
    double mean_sir = 0.0;
    for (double s : sir[t]) mean_sir += s;
    out.add(t, "mean_user_sir_db", linear_to_db(mean_sir / static_cast<double>(sir[t].size())));
  }
  const double m = mean_of(se);
  const double half = 1.96 * sample_std(se) / std::sqrt(static_cast<double>(se.size()));
  out.derived.emplace_back("speff_mean", m);
  out.derived.emplace_back("speff_ci95_low", m - half);
  out.derived.emplace_back("speff_ci95_high", m + half);
  return out;
}

namespace {

struct BeaconTrial {
  std::size_t cell = 0;
  std::size_t offset = 0;
  double frac_bins = 0.0;
  control::AcquisitionResult acq;
};

BeaconTrial beacon_trial(const Scenario& sc, std::uint64_t seed) {
  const auto& kb = sc.beacon;
  const auto& cfg = kb.beacon;
  Rng rng(seed);
  BeaconTrial tr;
  tr.cell = kb.cell_id ? *kb.cell_id : static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(cfg.num_cells)));
  tr.offset = kb.timing_offset ? *kb.timing_offset
                               : static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.symbol_length()) - 1));
  tr.frac_bins = kb.fractional_cfo_bins ? *kb.fractional_cfo_bins : rng.uniform() - 0.5;

  const Bits frame = control::encode_frame(kb.bch, kb.pch, kb.layout);
  const CVec symbols = control::control_symbols(frame, kb.frames);
  const auto pdp = channel::PowerDelayProfile::from_name(kb.pdp, kb.path_count);

  const CVec home_tx = control::build_beacon_stream(tr.cell, symbols, cfg);
  // SNR and geometry refer to the realized received power; the spread across subcarriers stays
  const auto h_home = channel::scaled_to_unit_energy(channel::generate_channel({1, pdp, derive_seed(seed, "home-channel")}));
  CVec rx = convolve(h_home.row(0), home_tx);

  if (kb.interferer_db) {
    std::size_t other = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(cfg.num_cells) - 1));
    if (other >= tr.cell) ++other;
    const CVec tx = control::build_beacon_stream(other, symbols, cfg);
    const auto h = channel::scaled_to_unit_energy(channel::generate_channel({1, pdp, derive_seed(seed, "interferer-channel")}));
    const std::size_t slack = cfg.cp_len - cfg.window_backoff + 1 - kb.path_count;
    const auto shift = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(slack)));
    const CVec y = convolve(h.row(0), tx);
    const double amp = std::pow(10.0, *kb.interferer_db / 20.0);
    for (std::size_t i = 0; i + shift < rx.size() && i < y.size(); ++i) rx[i + shift] += amp * y[i];
  }

  const double cfo = (tr.frac_bins + kb.integer_cfo_bins) / static_cast<double>(cfg.fft_size);
  rx = control::apply_frequency_offset(rx, cfo);
  rx.insert(rx.begin(), tr.offset, cplx{0.0, 0.0});
  if (kb.snr_db) {
    const double signal = (cfg.pct_amplitude * cfg.pct_amplitude + static_cast<double>(cfg.scts_per_cell)) /
                          static_cast<double>(cfg.fft_size);
    add_awgn(std::span<cplx>(rx), signal / db_to_linear(*kb.snr_db), rng);
  }
  tr.acq = control::acquire(rx, cfg, kb.layout);
  return tr;
}

}  // namespace

ExperimentResult run_beacon_experiment(const Scenario& sc) {
  sc.validate();
  std::vector<BeaconTrial> res(sc.trials);
  parallel_for(sc.trials, [&](std::size_t t) { res[t] = beacon_trial(sc, derive_seed(sc.seed, "beacon", t)); });
  ExperimentResult out;
  out.experiment = "beacon";
  out.scenario = sc.to_json();
  const auto& kb = sc.beacon;
  const std::size_t period = kb.layout.frame_symbols();
  const std::size_t n = kb.beacon.fft_size;
  const std::size_t L = kb.beacon.symbol_length();
  double ok_count = 0.0;
  for (std::size_t t = 0; t < sc.trials; ++t) {
    const auto& r = res[t];
    const bool cell_ok = r.acq.cell_id == r.cell;
    // frame position in samples, compared modulo the frame duration
    bool frame_ok = r.acq.success && r.acq.frame_start && r.acq.bch == kb.bch && r.acq.pch == kb.pch;
    if (frame_ok) {
      const auto span = static_cast<long>(period * L);
      const long found = static_cast<long>(r.acq.sync.symbol_timing + *r.acq.frame_start * L);
      long d = (found - static_cast<long>(r.offset)) % span;
      if (d < 0) d += span;
      if (d > span / 2) d -= span;
      frame_ok = std::labs(d) < static_cast<long>(L / 2);
    }
    out.add(t, "cell_ok", cell_ok);
    out.add(t, "frame_ok", frame_ok);
    long te = (static_cast<long>(r.acq.sync.symbol_timing) - static_cast<long>(r.offset)) % static_cast<long>(L);
    if (te < 0) te += static_cast<long>(L);
    if (te >= static_cast<long>(L / 2)) te -= static_cast<long>(L);
    out.add(t, "timing_error", static_cast<double>(te));
    out.add(t, "fractional_cfo_error_bins", r.acq.sync.fractional_cfo * static_cast<double>(n) - r.frac_bins);
    out.add(t, "integer_cfo_ok", r.acq.sync.integer_cfo == kb.integer_cfo_bins);
    ok_count += cell_ok && frame_ok;
  }
  const double rate = ok_count / static_cast<double>(sc.trials);
  out.derived.emplace_back("success_rate", rate);
  out.checks.push_back({"acquisition_99pct", rate >= 0.99, "cell and frame sync success rate " + label(rate)});
  return out;
}

ExperimentResult run_callsetup_experiment(const Scenario& sc) {
  sc.validate();
  std::vector<CallSetupResult> res(sc.trials);
  const double threshold = call_setup_rach_threshold(sc, sc.seed);
  parallel_for(sc.trials, [&](std::size_t t) { res[t] = run_call_setup(sc, derive_seed(sc.seed, "callsetup", t), threshold); });
  ExperimentResult out;
  out.experiment = "callsetup";
  out.scenario = sc.to_json();
  double ok = 0.0;
  for (std::size_t t = 0; t < sc.trials; ++t) {
    const auto& r = res[t];
    out.add(t, "success", r.success);
    out.add(t, "slots", static_cast<double>(r.slots));
    for (std::size_t u = 0; u < r.ues.size(); ++u) {
      const std::string p = "ue" + std::to_string(u + 1) + ".";
      out.add(t, p + "rach_attempts", r.ues[u].rach_attempts);
      out.add(t, p + "collisions", r.ues[u].collisions);
      out.add(t, p + "timing_residual", static_cast<double>(r.ues[u].timing_residual));
      out.add(t, p + "final_sinr_db", r.ues[u].sinr_db.empty() ? std::nan("") : r.ues[u].sinr_db.back());
    }
    ok += r.success;
  }
  out.derived.emplace_back("success_rate", ok / static_cast<double>(sc.trials));
  out.derived.emplace_back("rach_threshold", threshold);
  out.checks.push_back({"all_calls_completed", ok == static_cast<double>(sc.trials),
                        label(ok) + " of " + std::to_string(sc.trials) + " runs"});
  return out;
}

ExperimentResult run_experiment(const std::string& name, const Scenario& sc) {
  if (name == "sir") return run_sir_experiment(sc);
  if (name == "hardening") return run_hardening_experiment(sc);
  if (name == "ber") return run_ber_experiment(sc);
  if (name == "speff") return run_spectral_efficiency(sc);
  if (name == "beacon") return run_beacon_experiment(sc);
  if (name == "callsetup") return run_callsetup_experiment(sc);
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace mdma::sim
