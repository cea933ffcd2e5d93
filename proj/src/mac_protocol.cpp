#include "mdma/mac_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdma::mac {

void FrameConfig::validate() const {
  if (subframes_per_frame < 1) throw ConfigError("frame needs at least one subframe");
  if (samples_per_slot < 1) throw ConfigError("slot needs at least one sample");
}

std::string_view to_string(CallState s) {
  switch (s) {
    case CallState::PowerOff: return "PowerOff";
    case CallState::Synchronizing: return "Synchronizing";
    case CallState::CellSelected: return "CellSelected";
    case CallState::FrameSynced: return "FrameSynced";
    case CallState::SystemInfoAcquired: return "SystemInfoAcquired";
    case CallState::RandomAccessSent: return "RandomAccessSent";
    case CallState::AckWait: return "AckWait";
    case CallState::Dedicated: return "Dedicated";
    case CallState::Released: return "Released";
  }
  return "?";
}

std::string_view to_string(Event e) {
  switch (e) {
    case Event::PowerOn: return "PowerOn";
    case Event::CellFound: return "CellFound";
    case Event::HeaderFound: return "HeaderFound";
    case Event::BchDecoded: return "BchDecoded";
    case Event::RachTransmitted: return "RachTransmitted";
    case Event::UplinkSlotEnd: return "UplinkSlotEnd";
    case Event::AckDecoded: return "AckDecoded";
    case Event::AckLost: return "AckLost";
    case Event::SyncLost: return "SyncLost";
    case Event::CallEnd: return "CallEnd";
    case Event::Timeout: return "Timeout";
  }
  return "?";
}

std::string_view to_string(ReleaseCause c) {
  switch (c) {
    case ReleaseCause::None: return "None";
    case ReleaseCause::CallCompleted: return "CallCompleted";
    case ReleaseCause::NeverPoweredOn: return "NeverPoweredOn";
    case ReleaseCause::SyncFailed: return "SyncFailed";
    case ReleaseCause::RandomAccessFailed: return "RandomAccessFailed";
    case ReleaseCause::RadioLinkFailure: return "RadioLinkFailure";
  }
  return "?";
}

void RetryPolicy::validate() const {
  if (max_sync_attempts < 1 || max_rach_attempts < 1) throw ConfigError("retry limits must be >= 1");
  if (backoff_min_subframes < 1 || backoff_max_subframes < backoff_min_subframes) {
    throw ConfigError("backoff range must satisfy 1 <= min <= max");
  }
}

namespace {

Transition released(ReleaseCause c) { return {CallState::Released, true, c}; }

Transition resync(const CallContext& ctx, const RetryPolicy& p) {
  if (ctx.sync_attempts + 1 < p.max_sync_attempts) return {CallState::Synchronizing, true, ReleaseCause::None};
  return released(ReleaseCause::SyncFailed);
}

Transition retry_access(const CallContext& ctx, const RetryPolicy& p) {
  if (ctx.rach_attempts < p.max_rach_attempts) return {CallState::SystemInfoAcquired, true, ReleaseCause::None};
  return released(ReleaseCause::RandomAccessFailed);
}

Transition go(CallState s) { return {s, true, ReleaseCause::None}; }

}  // namespace

Transition next_state(const CallContext& ctx, Event e, const RetryPolicy& p) {
  using S = CallState;
  using E = Event;
  switch (ctx.state) {
    case S::PowerOff:
      if (e == E::PowerOn) return go(S::Synchronizing);
      if (e == E::Timeout) return released(ReleaseCause::NeverPoweredOn);
      break;
    case S::Synchronizing:
      if (e == E::CellFound) return go(S::CellSelected);
      if (e == E::Timeout) return resync(ctx, p);
      break;
    case S::CellSelected:
      if (e == E::HeaderFound) return go(S::FrameSynced);
      if (e == E::SyncLost || e == E::Timeout) return resync(ctx, p);
      break;
    case S::FrameSynced:
      if (e == E::BchDecoded) return go(S::SystemInfoAcquired);
      if (e == E::SyncLost || e == E::Timeout) return resync(ctx, p);
      break;
    case S::SystemInfoAcquired:
      if (e == E::RachTransmitted) return go(S::RandomAccessSent);
      if (e == E::SyncLost || e == E::Timeout) return resync(ctx, p);
      break;
    case S::RandomAccessSent:
      if (e == E::UplinkSlotEnd) return go(S::AckWait);
      if (e == E::Timeout) return retry_access(ctx, p);
      break;
    case S::AckWait:
      if (e == E::AckDecoded) return go(S::Dedicated);
      if (e == E::AckLost || e == E::Timeout) return retry_access(ctx, p);
      break;
    case S::Dedicated:
      if (e == E::CallEnd) return released(ReleaseCause::CallCompleted);
      if (e == E::SyncLost || e == E::Timeout) return released(ReleaseCause::RadioLinkFailure);
      break;
    case S::Released:
      break;
  }
  return {ctx.state, false, ReleaseCause::None};
}

Transition fsm_step(CallContext& ctx, Event e, const RetryPolicy& p) {
  const Transition t = next_state(ctx, e, p);
  if (!t.legal) return t;
  const bool sync_failure = (e == Event::Timeout || e == Event::SyncLost) && ctx.state != CallState::PowerOff &&
                            ctx.state != CallState::RandomAccessSent && ctx.state != CallState::AckWait &&
                            ctx.state != CallState::Dedicated;
  if (sync_failure) ++ctx.sync_attempts;
  if (e == Event::RachTransmitted) ++ctx.rach_attempts;
  ctx.state = t.next;
  if (t.next == CallState::Released) ctx.cause = t.cause;
  return t;
}

unsigned draw_backoff(Rng& rng, const RetryPolicy& p) {
  return static_cast<unsigned>(rng.uniform_int(p.backoff_min_subframes, p.backoff_max_subframes));
}

double open_loop_power(double beacon_tx_power_db, double measured_beacon_rx_power_db, double target_rach_rx_power_db,
                       const PowerBounds& bounds) {
  const double path_loss = beacon_tx_power_db - measured_beacon_rx_power_db;
  return std::clamp(target_rach_rx_power_db + path_loss, bounds.min_db, bounds.max_db);
}

void PowerControlState::validate() const {
  if (!(step > 0.0)) throw ConfigError("power control step must be positive");
  if (!(min_power <= max_power)) throw ConfigError("power bounds must satisfy min <= max");
}

double closed_loop_step(double measured_sinr_db, PowerControlState& pcs) {
  const double cmd = measured_sinr_db < pcs.target_sinr ? pcs.step : -pcs.step;
  pcs.current_tx_power = std::clamp(pcs.current_tx_power + cmd, pcs.min_power, pcs.max_power);
  return cmd;
}

std::string TraceRecord::line() const {
  return std::to_string(slot) + "," + entity + "," + state + "," + event + "," + next_state;
}

void ProtocolTrace::write(std::ostream& os) const {
  os << "slot,entity,state,event,next_state\n";
  for (const auto& r : records) os << r.line() << '\n';
}

std::string ProtocolTrace::text() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

Transition step_and_trace(CallContext& ctx, Event event, std::size_t slot, const std::string& entity,
                          ProtocolTrace& trace, const RetryPolicy& policy) {
  const CallState before = ctx.state;
  const Transition t = fsm_step(ctx, event, policy);
  if (!t.legal) {
    trace.warnings.push_back("slot " + std::to_string(slot) + " " + entity + ": illegal event " +
                             std::string(to_string(event)) + " in " + std::string(to_string(before)));
    return t;
  }
  std::string next(to_string(t.next));
  if (t.next == CallState::Released) next += "(" + std::string(to_string(t.cause)) + ")";
  trace.records.push_back({slot, entity, std::string(to_string(before)), std::string(to_string(event)), next});
  return t;
}

}  // namespace mdma::mac
