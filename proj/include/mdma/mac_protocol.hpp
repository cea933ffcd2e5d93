#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mdma/common.hpp"

namespace mdma::mac {

enum class SlotType { Uplink, Downlink };

/// TDD frame: every subframe is four slots, UL UL DL DL.
struct FrameConfig {
  static constexpr std::array<SlotType, 4> kPattern = {SlotType::Uplink, SlotType::Uplink, SlotType::Downlink,
                                                       SlotType::Downlink};
  static constexpr std::size_t kSlotsPerSubframe = kPattern.size();

  std::size_t subframes_per_frame = 10;
  std::size_t samples_per_slot = 1024;

  void validate() const;
  std::size_t slots_per_frame() const { return subframes_per_frame * kSlotsPerSubframe; }
  static SlotType slot_type(std::size_t slot) { return kPattern[slot % kSlotsPerSubframe]; }
  static std::size_t subframe_of(std::size_t slot) { return slot / kSlotsPerSubframe; }
  static std::size_t slot_in_subframe(std::size_t slot) { return slot % kSlotsPerSubframe; }
  static std::size_t first_slot_of(std::size_t subframe) { return subframe * kSlotsPerSubframe; }
};

enum class CallState {
  PowerOff,
  Synchronizing,
  CellSelected,
  FrameSynced,
  SystemInfoAcquired,
  RandomAccessSent,
  AckWait,
  Dedicated,
  Released,
};
inline constexpr std::size_t kCallStateCount = 9;

enum class Event {
  PowerOn,
  CellFound,
  HeaderFound,
  BchDecoded,
  RachTransmitted,
  UplinkSlotEnd,
  AckDecoded,
  AckLost,
  SyncLost,
  CallEnd,
  Timeout,
};
inline constexpr std::size_t kEventCount = 11;

enum class ReleaseCause {
  None,
  CallCompleted,
  NeverPoweredOn,
  SyncFailed,
  RandomAccessFailed,
  RadioLinkFailure,
};

std::string_view to_string(CallState s);
std::string_view to_string(Event e);
std::string_view to_string(ReleaseCause c);

struct RetryPolicy {
  unsigned max_sync_attempts = 4;
  unsigned max_rach_attempts = 4;
  unsigned backoff_min_subframes = 1;
  unsigned backoff_max_subframes = 8;

  void validate() const;
};

struct CallContext {
  CallState state = CallState::PowerOff;
  unsigned sync_attempts = 0;
  unsigned rach_attempts = 0;
  ReleaseCause cause = ReleaseCause::None;
};

struct Transition {
  CallState next = CallState::PowerOff;
  bool legal = false;
  /// Set when next is Released.
  ReleaseCause cause = ReleaseCause::None;
};

/// Pure table lookup. Illegal (state, event) pairs return legal = false and next = state.
Transition next_state(const CallContext& ctx, Event event, const RetryPolicy& policy = {});

/// Applies next_state to ctx and updates the retry counters. Illegal events leave ctx as is.
Transition fsm_step(CallContext& ctx, Event event, const RetryPolicy& policy = {});

/// Uniform random-access backoff in [backoff_min, backoff_max] subframes.
unsigned draw_backoff(Rng& rng, const RetryPolicy& policy);

struct PowerBounds {
  double min_db = -50.0;
  double max_db = 23.0;
};

/// clamp(target_rach_rx + (beacon_tx - measured_beacon_rx), bounds)
double open_loop_power(double beacon_tx_power_db, double measured_beacon_rx_power_db, double target_rach_rx_power_db,
                       const PowerBounds& bounds = {});

struct PowerControlState {
  double current_tx_power = 0.0;  // dB
  double target_sinr = 10.0;      // dB
  double step = 1.0;              // dB
  double min_power = -50.0;       // dB
  double max_power = 23.0;        // dB

  void validate() const;
};

/// Power command: +step when measured < target, otherwise -step (a tie steps down).
/// The command is applied to pcs.current_tx_power, clamped to the bounds.
double closed_loop_step(double measured_sinr_db, PowerControlState& pcs);

/// One line of the protocol trace: slot,entity,state,event,next_state
struct TraceRecord {
  std::size_t slot = 0;
  std::string entity;
  std::string state;
  std::string event;
  std::string next_state;

  std::string line() const;
  bool operator==(const TraceRecord&) const = default;
};

struct ProtocolTrace {
  std::vector<TraceRecord> records;
  /// Illegal events, reported as protocol warnings (not part of the trace schema).
  std::vector<std::string> warnings;

  void write(std::ostream& os) const;
  std::string text() const;
};

/// Runs fsm_step and appends the transition (or a warning for an illegal event).
Transition step_and_trace(CallContext& ctx, Event event, std::size_t slot, const std::string& entity,
                          ProtocolTrace& trace, const RetryPolicy& policy = {});

}  // namespace mdma::mac
