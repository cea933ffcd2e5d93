#include "mdma/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>

#include "mdma/channel_model.hpp"

namespace mdma::sim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void size(const char* key, std::size_t& out) {
    if (const json* v = take(key)) out = as_size(*v, key);
  }
  void u64(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void unsigned_int(const char* key, unsigned& out) {
    std::size_t v = out;
    size(key, v);
    if (v > std::numeric_limits<unsigned>::max()) throw ConfigError(where(key) + " is too large");
    out = static_cast<unsigned>(v);
  }
  void integer(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      const auto x = v->get<std::int64_t>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError(where(key) + " is out of range");
      }
      out = static_cast<int>(x);
    }
  }
  void int8(const char* key, std::int8_t& out) {
    int v = out;
    integer(key, v);
    if (v < -128 || v > 127) throw ConfigError(where(key) + " must fit in a signed byte");
    out = static_cast<std::int8_t>(v);
  }
  void number(const char* key, double& out) {
    if (const json* v = take(key)) out = as_number(*v, key);
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void opt_size(const char* key, std::optional<std::size_t>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) out.reset();
      else out = as_size(*v, key);
    }
  }
  void opt_number(const char* key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) out.reset();
      else out = as_number(*v, key);
    }
  }
  void size_list(const char* key, std::vector<std::size_t>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array");
      out.clear();
      for (const auto& e : *v) out.push_back(as_size(e, key));
    }
  }
  void number_list(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array");
      out.clear();
      for (const auto& e : *v) out.push_back(as_number(e, key));
    }
  }
  template <class T>
  void small_uint_list(const char* key, std::vector<T>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array");
      out.clear();
      for (const auto& e : *v) {
        const auto x = as_size(e, key);
        if (x > std::numeric_limits<T>::max()) throw ConfigError(where(key) + " entry out of range");
        out.push_back(static_cast<T>(x));
      }
    }
  }
  const json* child(const char* key) { return take(key); }
  std::string where(const char* key = nullptr) const { return key ? path_ + "." + key : path_; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + path_ + "." + item.key());
    }
  }

 private:
  const json* take(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }
  std::size_t as_size(const json& v, const char* key) const {
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
    return v.get<std::size_t>();
  }
  double as_number(const json& v, const char* key) const {
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    return v.get<double>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void read_beacon_config(const json& j, control::BeaconConfig& b, const std::string& path) {
  ObjectReader r(j, path);
  r.size("fft_size", b.fft_size);
  r.size("cp_len", b.cp_len);
  r.size("num_cells", b.num_cells);
  r.size("scts_per_cell", b.scts_per_cell);
  r.size("guard_bins", b.guard_bins);
  if (const json* v = r.child("pct_bin")) {
    if (v->is_null()) b.pct_bin.reset();
    else if (v->is_number_integer()) b.pct_bin = v->get<int>();
    else throw ConfigError(path + ".pct_bin must be an integer or null");
  }
  r.number("pct_amplitude", b.pct_amplitude);
  r.size("window_backoff", b.window_backoff);
  r.finish();
}

void read_layout(const json& j, control::ControlFrameLayout& l, const std::string& path) {
  ObjectReader r(j, path);
  r.size("header_len", l.header_len);
  r.size("root_slots", l.root_slots);
  r.size("page_slots", l.page_slots);
  r.finish();
}

void read_rach(const json& j, mac::RachConfig& c, const std::string& path) {
  ObjectReader r(j, path);
  r.size("zc_length", c.zc_length);
  r.size("path_count", c.path_count);
  r.size("max_delay", c.max_delay);
  r.number("false_alarm_target", c.false_alarm_target);
  r.number("relative_floor", c.relative_floor);
  r.finish();
}

}  // namespace

void Scenario::validate() const {
  if (antenna_count < 1 || user_count < 1 || path_count < 1) throw ConfigError("M, K and N must all be >= 1");
  if (!(other_cell_factor >= 0.0)) throw ConfigError("other_cell_factor must be >= 0");
  if (!(noise_power >= 0.0)) throw ConfigError("noise_power must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  (void)channel::PowerDelayProfile::from_name(pdp, path_count);
  if (sir.symbols < 1 || speff.symbols < 1) throw ConfigError("symbol counts must be >= 1");
  if (hardening.antenna_counts.empty()) throw ConfigError("hardening.antenna_counts must not be empty");
  for (auto m : hardening.antenna_counts) {
    if (m < 1) throw ConfigError("hardening.antenna_counts entries must be >= 1");
  }
  if (hardening.seed_replicas < 1) throw ConfigError("hardening.seed_replicas must be >= 1");
  if (hardening.symbols < 1) throw ConfigError("hardening.symbols must be >= 1");
  if (hardening.users_per_antenna && !(*hardening.users_per_antenna > 0.0)) {
    throw ConfigError("hardening.users_per_antenna must be positive");
  }
  if (ber.snr_db.empty()) throw ConfigError("ber.snr_db must not be empty");
  if (ber.bits_per_trial < 1) throw ConfigError("ber.bits_per_trial must be >= 1");
  beacon.beacon.validate();
  if (beacon.path_count < 1 || beacon.path_count > beacon.beacon.cp_len - beacon.beacon.window_backoff + 1) {
    throw ConfigError("beacon.path_count must be in 1..cp_len - window_backoff + 1");
  }
  (void)channel::PowerDelayProfile::from_name(beacon.pdp, beacon.path_count);
  if (beacon.frames < 1) throw ConfigError("beacon.frames must be >= 1");
  if (beacon.timing_offset && *beacon.timing_offset >= beacon.beacon.symbol_length()) {
    throw ConfigError("beacon.timing_offset must be below the OFDM symbol length");
  }
  if (beacon.cell_id && (*beacon.cell_id < 1 || *beacon.cell_id > beacon.beacon.num_cells)) {
    throw ConfigError("beacon.cell_id must be in 1..num_cells");
  }
  if (beacon.interferer_db && beacon.beacon.num_cells < 2) throw ConfigError("an interfering cell needs num_cells >= 2");
  (void)control::encode_bch(beacon.bch, beacon.layout);
  (void)control::encode_pch(beacon.pch, beacon.layout);
  callsetup.rach.validate();
  callsetup.retry.validate();
  callsetup.frame.validate();
  if (callsetup.ue_count < 1) throw ConfigError("callsetup.ue_count must be >= 1");
  if (callsetup.rach.path_count != path_count) throw ConfigError("callsetup.rach.path_count must equal path_count");
  if (beacon.bch.pilot_roots.empty()) throw ConfigError("beacon.bch.pilot_roots must not be empty");
  for (auto r : beacon.bch.pilot_roots) {
    if (r < 1 || r >= callsetup.rach.zc_length) throw ConfigError("pilot roots must be in 1..zc_length-1");
  }
  if (!(callsetup.power_step_db > 0.0)) throw ConfigError("callsetup.power_step_db must be positive");
  if (callsetup.calibration_trials < 1) throw ConfigError("callsetup.calibration_trials must be >= 1");
}

ordered_json Scenario::to_json() const {
  ordered_json j;
  j["antenna_count"] = antenna_count;
  j["user_count"] = user_count;
  j["path_count"] = path_count;
  j["pdp"] = pdp;
  j["other_cell_factor"] = other_cell_factor;
  j["noise_power"] = noise_power;
  j["trials"] = trials;
  j["seed"] = seed;
  j["sir"] = {{"symbols", sir.symbols}};
  j["hardening"] = {{"antenna_counts", hardening.antenna_counts},
                    {"seed_replicas", hardening.seed_replicas},
                    {"users_per_antenna", opt(hardening.users_per_antenna)},
                    {"symbols", hardening.symbols}};
  j["ber"] = {{"snr_db", ber.snr_db},
              {"bits_per_trial", ber.bits_per_trial},
              {"symbol_spacing", ber.symbol_spacing},
              {"estimated_csi", ber.estimated_csi},
              {"pilot_power_offset_db", ber.pilot_power_offset_db},
              {"zc_length", ber.zc_length}};
  j["speff"] = {{"symbols", speff.symbols}};
  const auto& b = beacon.beacon;
  ordered_json bc = {{"fft_size", b.fft_size},
                     {"cp_len", b.cp_len},
                     {"num_cells", b.num_cells},
                     {"scts_per_cell", b.scts_per_cell},
                     {"guard_bins", b.guard_bins},
                     {"pct_bin", opt(b.pct_bin)},
                     {"pct_amplitude", b.pct_amplitude},
                     {"window_backoff", b.window_backoff}};
  std::vector<int> roots(beacon.bch.pilot_roots.begin(), beacon.bch.pilot_roots.end());
  j["beacon"] = {{"config", bc},
                 {"layout",
                  {{"header_len", beacon.layout.header_len},
                   {"root_slots", beacon.layout.root_slots},
                   {"page_slots", beacon.layout.page_slots}}},
                 {"snr_db", opt(beacon.snr_db)},
                 {"path_count", beacon.path_count},
                 {"pdp", beacon.pdp},
                 {"frames", beacon.frames},
                 {"timing_offset", opt(beacon.timing_offset)},
                 {"fractional_cfo_bins", opt(beacon.fractional_cfo_bins)},
                 {"integer_cfo_bins", beacon.integer_cfo_bins},
                 {"cell_id", opt(beacon.cell_id)},
                 {"interferer_db", opt(beacon.interferer_db)},
                 {"bch",
                  {{"beacon_power_db", static_cast<int>(beacon.bch.beacon_power_db)},
                   {"pilot_roots", roots},
                   {"target_rach_power_db", static_cast<int>(beacon.bch.target_rach_power_db)}}},
                 {"pch", {{"ids", beacon.pch.ids}}}};
  const auto& c = callsetup;
  j["callsetup"] = {{"ue_count", c.ue_count},
                    {"forced_collisions", c.forced_collisions},
                    {"beacon_tx_power_db", c.beacon_tx_power_db},
                    {"path_loss_db", c.path_loss_db},
                    {"noise_power_db", c.noise_power_db},
                    {"beacon_snr_db", opt(c.beacon_snr_db)},
                    {"target_rach_power_db", c.target_rach_power_db},
                    {"target_sinr_db", c.target_sinr_db},
                    {"power_step_db", c.power_step_db},
                    {"dedicated_subframes", c.dedicated_subframes},
                    {"max_subframes", c.max_subframes},
                    {"calibration_trials", c.calibration_trials},
                    {"rach",
                     {{"zc_length", c.rach.zc_length},
                      {"path_count", c.rach.path_count},
                      {"max_delay", c.rach.max_delay},
                      {"false_alarm_target", c.rach.false_alarm_target},
                      {"relative_floor", c.rach.relative_floor}}},
                    {"power_bounds", {{"min_db", c.power_bounds.min_db}, {"max_db", c.power_bounds.max_db}}},
                    {"retry",
                     {{"max_sync_attempts", c.retry.max_sync_attempts},
                      {"max_rach_attempts", c.retry.max_rach_attempts},
                      {"backoff_min_subframes", c.retry.backoff_min_subframes},
                      {"backoff_max_subframes", c.retry.backoff_max_subframes}}},
                    {"frame",
                     {{"subframes_per_frame", c.frame.subframes_per_frame},
                      {"samples_per_slot", c.frame.samples_per_slot}}}};
  return j;
}

Scenario Scenario::from_json(const json& j) {
  Scenario s;
  ObjectReader r(j, "scenario");
  r.size("antenna_count", s.antenna_count);
  r.size("user_count", s.user_count);
  r.size("path_count", s.path_count);
  r.string("pdp", s.pdp);
  r.number("other_cell_factor", s.other_cell_factor);
  r.number("noise_power", s.noise_power);
  r.size("trials", s.trials);
  r.u64("seed", s.seed);
  // RACH window follows the scenario's path count unless overridden below
  s.callsetup.rach.path_count = s.path_count;

  if (const json* v = r.child("sir")) {
    ObjectReader o(*v, "scenario.sir");
    o.size("symbols", s.sir.symbols);
    o.finish();
  }
  if (const json* v = r.child("hardening")) {
    ObjectReader o(*v, "scenario.hardening");
    o.size_list("antenna_counts", s.hardening.antenna_counts);
    o.size("seed_replicas", s.hardening.seed_replicas);
    o.opt_number("users_per_antenna", s.hardening.users_per_antenna);
    o.size("symbols", s.hardening.symbols);
    o.finish();
  }
  if (const json* v = r.child("ber")) {
    ObjectReader o(*v, "scenario.ber");
    o.number_list("snr_db", s.ber.snr_db);
    o.size("bits_per_trial", s.ber.bits_per_trial);
    o.size("symbol_spacing", s.ber.symbol_spacing);
    o.boolean("estimated_csi", s.ber.estimated_csi);
    o.number("pilot_power_offset_db", s.ber.pilot_power_offset_db);
    o.size("zc_length", s.ber.zc_length);
    o.finish();
  }
  if (const json* v = r.child("speff")) {
    ObjectReader o(*v, "scenario.speff");
    o.size("symbols", s.speff.symbols);
    o.finish();
  }
  if (const json* v = r.child("beacon")) {
    ObjectReader o(*v, "scenario.beacon");
    auto& b = s.beacon;
    if (const json* c = o.child("config")) read_beacon_config(*c, b.beacon, "scenario.beacon.config");
    if (const json* c = o.child("layout")) read_layout(*c, b.layout, "scenario.beacon.layout");
    o.opt_number("snr_db", b.snr_db);
    o.size("path_count", b.path_count);
    o.string("pdp", b.pdp);
    o.size("frames", b.frames);
    o.opt_size("timing_offset", b.timing_offset);
    o.opt_number("fractional_cfo_bins", b.fractional_cfo_bins);
    o.integer("integer_cfo_bins", b.integer_cfo_bins);
    o.opt_size("cell_id", b.cell_id);
    o.opt_number("interferer_db", b.interferer_db);
    if (const json* c = o.child("bch")) {
      ObjectReader br(*c, "scenario.beacon.bch");
      br.int8("beacon_power_db", b.bch.beacon_power_db);
      br.small_uint_list("pilot_roots", b.bch.pilot_roots);
      br.int8("target_rach_power_db", b.bch.target_rach_power_db);
      br.finish();
    }
    if (const json* c = o.child("pch")) {
      ObjectReader pr(*c, "scenario.beacon.pch");
      pr.small_uint_list("ids", b.pch.ids);
      pr.finish();
    }
    o.finish();
  }
  if (const json* v = r.child("callsetup")) {
    ObjectReader o(*v, "scenario.callsetup");
    auto& c = s.callsetup;
    o.size("ue_count", c.ue_count);
    o.size("forced_collisions", c.forced_collisions);
    o.number("beacon_tx_power_db", c.beacon_tx_power_db);
    o.number("path_loss_db", c.path_loss_db);
    o.number("noise_power_db", c.noise_power_db);
    o.opt_number("beacon_snr_db", c.beacon_snr_db);
    o.number("target_rach_power_db", c.target_rach_power_db);
    o.number("target_sinr_db", c.target_sinr_db);
    o.number("power_step_db", c.power_step_db);
    o.size("dedicated_subframes", c.dedicated_subframes);
    o.size("max_subframes", c.max_subframes);
    o.size("calibration_trials", c.calibration_trials);
    if (const json* x = o.child("rach")) read_rach(*x, c.rach, "scenario.callsetup.rach");
    if (const json* x = o.child("power_bounds")) {
      ObjectReader p(*x, "scenario.callsetup.power_bounds");
      p.number("min_db", c.power_bounds.min_db);
      p.number("max_db", c.power_bounds.max_db);
      p.finish();
    }
    if (const json* x = o.child("retry")) {
      ObjectReader p(*x, "scenario.callsetup.retry");
      p.unsigned_int("max_sync_attempts", c.retry.max_sync_attempts);
      p.unsigned_int("max_rach_attempts", c.retry.max_rach_attempts);
      p.unsigned_int("backoff_min_subframes", c.retry.backoff_min_subframes);
      p.unsigned_int("backoff_max_subframes", c.retry.backoff_max_subframes);
      p.finish();
    }
    if (const json* x = o.child("frame")) {
      ObjectReader p(*x, "scenario.callsetup.frame");
      p.size("subframes_per_frame", c.frame.subframes_per_frame);
      p.size("samples_per_slot", c.frame.samples_per_slot);
      p.finish();
    }
    o.finish();
  }
  r.finish();
  s.validate();
  return s;
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace mdma::sim
