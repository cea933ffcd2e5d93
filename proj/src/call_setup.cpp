#include "mdma/call_setup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "mdma/acquisition.hpp"
#include "mdma/channel_model.hpp"
#include "mdma/downlink_phy.hpp"
#include "mdma/random_access.hpp"
#include "mdma/uplink_phy.hpp"

namespace mdma::sim {

namespace {

using mac::CallState;
using mac::Event;

// CP-correlation confidence above which the UE treats a cell as found (about 0 dB SNR).
constexpr double kCellFoundConfidence = 0.5;

struct Ue {
  std::string name;
  mac::CallContext ctx;
  Rng rng{0};
  channel::ChannelMatrix beacon_channel;
  channel::ChannelMatrix channel;  // M x N, aligned
  channel::ChannelMatrix uplink;   // M x (N + delay), as seen before timing advance
  std::size_t delay = 0;
  std::optional<control::AcquisitionResult> acq;
  double measured_beacon_db = 0.0;
  std::size_t next_rach_subframe = 0;
  unsigned root = 0;
  mac::PowerControlState pcs;
  std::size_t dedicated_since = 0;
  UeReport report;
};

struct PendingAck {
  std::size_t ue = 0;
  mac::AckMessage msg;
  uplink::ChannelEstimate estimate;
};

double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

double call_setup_rach_threshold(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  const std::vector<unsigned> roots(sc.beacon.bch.pilot_roots.begin(), sc.beacon.bch.pilot_roots.end());
  return mac::calibrate_rach_threshold(sc.callsetup.rach, sc.antenna_count, roots, sc.callsetup.calibration_trials,
                                       derive_seed(seed, "rach-threshold"));
}

CallSetupResult run_call_setup(const Scenario& sc, std::uint64_t seed, std::optional<double> rach_threshold) {
  sc.validate();
  const auto& cs = sc.callsetup;
  const auto& kb = sc.beacon;
  const auto& bcfg = kb.beacon;
  const std::size_t antennas = sc.antenna_count;
  const auto rach = cs.rach;

  CallSetupResult out;
  auto& trace = out.trace;

  // Beacon content: the BCH carries the power and random-access parameters the UEs use.
  control::BroadcastInfo bch = kb.bch;
  bch.beacon_power_db = static_cast<std::int8_t>(std::clamp(std::lround(cs.beacon_tx_power_db), -128L, 127L));
  bch.target_rach_power_db = static_cast<std::int8_t>(std::clamp(std::lround(cs.target_rach_power_db), -128L, 127L));
  const std::size_t cell = kb.cell_id.value_or(1);
  const Bits frame = control::encode_frame(bch, kb.pch, kb.layout);
  const CVec beacon_tx = control::build_beacon_stream(cell, control::control_symbols(frame, kb.frames), bcfg);
  const double beacon_nominal = (bcfg.pct_amplitude * bcfg.pct_amplitude + static_cast<double>(bcfg.scts_per_cell)) /
                                static_cast<double>(bcfg.fft_size);
  const double rx_gain_db = cs.beacon_tx_power_db - cs.path_loss_db;
  const double noise = from_db(cs.noise_power_db);
  const double beacon_noise = cs.beacon_snr_db ? from_db(rx_gain_db - *cs.beacon_snr_db) : noise;

  const auto ul_pdp = channel::PowerDelayProfile::from_name(sc.pdp, sc.path_count);
  const auto beacon_pdp = channel::PowerDelayProfile::from_name(kb.pdp, kb.path_count);

  std::vector<unsigned> candidates(bch.pilot_roots.begin(), bch.pilot_roots.end());
  const double threshold = rach_threshold ? *rach_threshold : call_setup_rach_threshold(sc, seed);
  std::vector<unsigned> dedicated_pool;
  for (unsigned r = 1; r < rach.zc_length && dedicated_pool.size() < cs.ue_count; ++r) {
    if (std::find(candidates.begin(), candidates.end(), r) == candidates.end()) dedicated_pool.push_back(r);
  }

  std::vector<Ue> ues(cs.ue_count);
  for (std::size_t u = 0; u < ues.size(); ++u) {
    auto& ue = ues[u];
    ue.name = "ue" + std::to_string(u + 1);
    ue.rng = Rng(derive_seed(seed, "ue", u));
    ue.beacon_channel =
        channel::scaled_to_unit_energy(channel::generate_channel({1, beacon_pdp, derive_seed(seed, "ue-beacon-channel", u)}));
    ue.channel = channel::generate_channel({antennas, ul_pdp, derive_seed(seed, "ue-channel", u)});
    ue.delay = static_cast<std::size_t>(ue.rng.uniform_int(0, static_cast<std::int64_t>(rach.max_delay)));
    ue.uplink = channel::delayed(ue.channel, ue.delay);
    ue.pcs.target_sinr = cs.target_sinr_db;
    ue.pcs.step = cs.power_step_db;
    ue.pcs.min_power = cs.power_bounds.min_db;
    ue.pcs.max_power = cs.power_bounds.max_db;
  }

  auto snapshot = [&](Ue& ue) {
    const std::size_t offset =
        static_cast<std::size_t>(ue.rng.uniform_int(0, static_cast<std::int64_t>(bcfg.symbol_length()) - 1));
    const double frac = ue.rng.uniform() - 0.5;
    CVec rx = convolve(ue.beacon_channel.row(0), beacon_tx);
    const double amp = std::sqrt(from_db(rx_gain_db) / beacon_nominal);
    for (auto& v : rx) v *= amp;
    rx = control::apply_frequency_offset(rx, frac / static_cast<double>(bcfg.fft_size));
    rx.insert(rx.begin(), offset, cplx{0.0, 0.0});
    add_awgn(std::span<cplx>(rx), beacon_noise, ue.rng);
    const double measured = energy(rx) / static_cast<double>(rx.size()) - beacon_noise;
    ue.measured_beacon_db = linear_to_db(std::max(measured, 1e-30));
    ue.acq = control::acquire(rx, bcfg, kb.layout);
  };

  auto step = [&](Ue& ue, Event e, std::size_t slot) {
    const auto t = mac::step_and_trace(ue.ctx, e, slot, ue.name, trace, cs.retry);
    if (t.legal && t.next == CallState::SystemInfoAcquired &&
        (e == Event::AckLost || e == Event::Timeout)) {
      ue.next_rach_subframe = mac::FrameConfig::subframe_of(slot) + mac::draw_backoff(ue.rng, cs.retry);
    }
    if (t.legal && t.next == CallState::Released) {
      ue.report.cause = t.cause;
      if (t.cause != mac::ReleaseCause::CallCompleted) {
        out.failures.push_back(ue.name + ": " + std::string(mac::to_string(t.cause)) + " at slot " + std::to_string(slot));
      }
    }
    return t;
  };

  auto bs_trace = [&](std::size_t slot, const std::string& state, const std::string& event, const std::string& next) {
    trace.records.push_back({slot, "bs", state, event, next});
  };

  // pairwise interference energies sum_l |r_kj(l)|^2 for the dedicated-mode SINR
  std::map<std::pair<std::size_t, std::size_t>, double> cross;
  auto cross_energy = [&](std::size_t k, std::size_t j) {
    auto key = std::make_pair(k, j);
    if (auto it = cross.find(key); it != cross.end()) return it->second;
    const double e = energy(uplink::combined_correlation(ues[k].channel, ues[j].channel));
    cross.emplace(key, e);
    return e;
  };

  Rng bs_rng(derive_seed(seed, "bs"));
  std::vector<mac::RachAttempt> attempts;
  std::vector<PendingAck> acks;
  const double ul_gain = -cs.path_loss_db;
  const std::size_t ack_spacing = rach.window();
  const std::size_t total_slots = cs.max_subframes * mac::FrameConfig::kSlotsPerSubframe;

  std::size_t slot = 0;
  for (; slot < total_slots; ++slot) {
    const std::size_t sf = mac::FrameConfig::subframe_of(slot);
    const std::size_t pos = mac::FrameConfig::slot_in_subframe(slot);
    const bool downlink = mac::FrameConfig::slot_type(slot) == mac::SlotType::Downlink;

    if (slot == 0) {
      bs_trace(0, "PowerOff", "PowerOn", "Broadcasting");
      for (auto& ue : ues) step(ue, Event::PowerOn, 0);
      continue;
    }

    // base station: random-access detection at the end of the first uplink slot's burst
    if (pos == 1 && !attempts.empty()) {
      AntennaSignals rx(antennas, CVec(rach.burst_length(), cplx{0.0, 0.0}));
      for (const auto& a : attempts) {
        const auto& ue = ues[a.ue];
        const double amp = std::sqrt(from_db(ue.pcs.current_tx_power + ul_gain));
        const AntennaSignals y = channel::propagate(ue.uplink, mac::rach_burst(a.root, rach), amp);
        for (std::size_t m = 0; m < antennas; ++m) {
          for (std::size_t i = 0; i < rach.burst_length(); ++i) rx[m][i] += y[m][i];
        }
      }
      add_awgn(rx, noise, bs_rng);
      const auto detections = mac::detect_rach(rx, candidates, rach, noise, threshold);
      const auto outcomes = mac::resolve_random_access(attempts, detections);
      std::vector<unsigned> collided;
      for (std::size_t i = 0; i < attempts.size(); ++i) {
        const auto& o = outcomes[i];
        const std::string root = "(" + std::to_string(o.root) + ")";
        if (o.kind == mac::RachOutcomeKind::Collision) {
          ++ues[attempts[i].ue].report.collisions;
          if (std::find(collided.begin(), collided.end(), o.root) == collided.end()) {
            collided.push_back(o.root);
            bs_trace(slot, "Broadcasting", "RachCollision" + root, "Broadcasting");
          }
        } else if (o.kind == mac::RachOutcomeKind::Missed) {
          bs_trace(slot, "Broadcasting", "RachMissed" + root, "Broadcasting");
        } else {
          bs_trace(slot, "Broadcasting", "RachDetected" + root, "Broadcasting");
          const auto it = std::find_if(detections.begin(), detections.end(), [&](const auto& d) { return d.root == o.root; });
          mac::AckMessage msg;
          msg.rach_root = static_cast<std::uint8_t>(o.root);
          msg.dedicated_root = static_cast<std::uint8_t>(dedicated_pool[attempts[i].ue]);
          msg.timing_advance = static_cast<std::uint8_t>(std::min<std::size_t>(o.timing, 255));
          msg.power_correction_db =
              static_cast<std::int8_t>(std::clamp(std::lround(cs.target_rach_power_db - o.rx_power_db), -128L, 127L));
          acks.push_back({attempts[i].ue, msg, it->estimate});
        }
      }
      attempts.clear();
    }

    // base station: pre-RAKE acknowledgements, superposed, on the first downlink slot
    std::vector<std::optional<mac::AckMessage>> heard(ues.size());
    if (pos == 2 && !acks.empty()) {
      std::vector<AntennaSignals> tx;
      for (const auto& a : acks) {
        tx.push_back(mac::transmit_ack(a.msg, a.estimate, ack_spacing));
        bs_trace(slot, "Broadcasting", "AckSent(" + std::to_string(a.msg.rach_root) + ")", "Broadcasting");
      }
      const double amp = std::sqrt(from_db(cs.beacon_tx_power_db - cs.path_loss_db));
      for (std::size_t u = 0; u < ues.size(); ++u) {
        if (ues[u].ctx.state != CallState::AckWait) continue;
        CVec rx;
        for (const auto& t : tx) {
          const CVec y = downlink::propagate_downlink(ues[u].uplink, t);
          if (rx.size() < y.size()) rx.resize(y.size(), cplx{0.0, 0.0});
          for (std::size_t i = 0; i < y.size(); ++i) rx[i] += amp * y[i];
        }
        add_awgn(std::span<cplx>(rx), noise, ues[u].rng);
        // the ack answering another UE's preamble is discarded
        const auto msg = mac::receive_ack(rx, rach.window(), ack_spacing);
        if (msg && msg->rach_root == ues[u].root) heard[u] = msg;
      }
      acks.clear();
    }

    // dedicated-mode SINR snapshot before anyone applies a power command
    std::vector<double> sinr_db(ues.size(), 0.0);
    if (!downlink) {
      for (std::size_t k = 0; k < ues.size(); ++k) {
        if (ues[k].ctx.state != CallState::Dedicated) continue;
        const double a = ues[k].channel.total_energy();
        double interference = noise * a;
        for (std::size_t j = 0; j < ues.size(); ++j) {
          if (j == k || ues[j].ctx.state != CallState::Dedicated) continue;
          interference += from_db(ues[j].pcs.current_tx_power + ul_gain) * cross_energy(k, j);
        }
        sinr_db[k] = linear_to_db(a * a * from_db(ues[k].pcs.current_tx_power + ul_gain) / interference);
      }
    }

    for (std::size_t u = 0; u < ues.size(); ++u) {
      auto& ue = ues[u];
      switch (ue.ctx.state) {
        case CallState::Synchronizing:
          if (downlink) {
            snapshot(ue);
            step(ue, ue.acq->sync.confidence >= kCellFoundConfidence ? Event::CellFound : Event::Timeout, slot);
          }
          break;
        case CallState::CellSelected:
          if (downlink) step(ue, ue.acq->frame_start ? Event::HeaderFound : Event::SyncLost, slot);
          break;
        case CallState::FrameSynced:
          if (downlink) step(ue, ue.acq->bch ? Event::BchDecoded : Event::SyncLost, slot);
          break;
        case CallState::SystemInfoAcquired:
          if (pos == 0 && sf >= ue.next_rach_subframe) {
            const auto& info = *ue.acq->bch;
            const bool forced = ue.ctx.rach_attempts < cs.forced_collisions;
            ue.root = forced ? info.pilot_roots.front()
                             : info.pilot_roots[static_cast<std::size_t>(
                                   ue.rng.uniform_int(0, static_cast<std::int64_t>(info.pilot_roots.size()) - 1))];
            ue.pcs.current_tx_power = mac::open_loop_power(info.beacon_power_db, ue.measured_beacon_db,
                                                           info.target_rach_power_db, cs.power_bounds);
            ue.report.tx_power_db.push_back(ue.pcs.current_tx_power);
            attempts.push_back({u, ue.root});
            step(ue, Event::RachTransmitted, slot);
          }
          break;
        case CallState::RandomAccessSent:
          if (pos == 1) step(ue, Event::UplinkSlotEnd, slot);
          break;
        case CallState::AckWait:
          if (pos == 2) {
            if (heard[u]) {
              const auto& msg = *heard[u];
              ue.report.dedicated_root = msg.dedicated_root;
              ue.report.timing_residual = static_cast<long>(ue.delay) - static_cast<long>(msg.timing_advance);
              ue.pcs.current_tx_power = std::clamp(ue.pcs.current_tx_power + msg.power_correction_db,
                                                   ue.pcs.min_power, ue.pcs.max_power);
              ue.report.tx_power_db.push_back(ue.pcs.current_tx_power);
              ue.dedicated_since = sf;
              step(ue, Event::AckDecoded, slot);
            } else {
              step(ue, Event::AckLost, slot);
            }
          }
          break;
        case CallState::Dedicated:
          if (!downlink) {
            ue.report.sinr_db.push_back(sinr_db[u]);
            mac::closed_loop_step(sinr_db[u], ue.pcs);
            ue.report.tx_power_db.push_back(ue.pcs.current_tx_power);
          } else if (pos == 3 && sf >= ue.dedicated_since + cs.dedicated_subframes) {
            step(ue, Event::CallEnd, slot);
          }
          break;
        case CallState::PowerOff:
        case CallState::Released:
          break;
      }
    }

    const bool done = std::all_of(ues.begin(), ues.end(), [](const Ue& ue) { return ue.ctx.state == CallState::Released; });
    if (done) {
      ++slot;
      break;
    }
  }
  out.slots = slot;

  out.success = true;
  for (auto& ue : ues) {
    if (ue.ctx.state != CallState::Released) {
      out.failures.push_back(ue.name + ": not released within " + std::to_string(cs.max_subframes) + " subframes");
    }
    ue.report.success = ue.ctx.state == CallState::Released && ue.ctx.cause == mac::ReleaseCause::CallCompleted;
    ue.report.sync_attempts = ue.ctx.sync_attempts;
    ue.report.rach_attempts = ue.ctx.rach_attempts;
    out.success = out.success && ue.report.success;
    out.ues.push_back(ue.report);
  }
  return out;
}

}  // namespace mdma::sim
