#include "mdma/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdma::channel {

PowerDelayProfile::PowerDelayProfile(std::vector<double> tap_powers) : taps_(std::move(tap_powers)) {
  if (taps_.empty()) throw ConfigError("power delay profile needs at least one tap");
  for (double p : taps_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("tap powers must be finite and non-negative");
  }
}

PowerDelayProfile PowerDelayProfile::uniform(std::size_t paths, double total_power) {
  if (paths == 0) throw ConfigError("path count must be >= 1");
  return PowerDelayProfile(std::vector<double>(paths, total_power / static_cast<double>(paths)));
}

PowerDelayProfile PowerDelayProfile::exponential(std::size_t paths, double decay, double total_power) {
  if (paths == 0) throw ConfigError("path count must be >= 1");
  if (!(decay > 0.0)) throw ConfigError("exponential decay must be positive");
  std::vector<double> taps(paths);
  for (std::size_t n = 0; n < paths; ++n) taps[n] = std::exp(-static_cast<double>(n) / decay);
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t *= total_power / sum;
  return PowerDelayProfile(std::move(taps));
}

PowerDelayProfile PowerDelayProfile::from_name(const std::string& shape, std::size_t paths,
                                               double total_power) {
  if (shape == "uniform") return uniform(paths, total_power);
  if (shape.rfind("exp:", 0) == 0) {
    double decay = 0.0;
    try {
      std::size_t used = 0;
      decay = std::stod(shape.substr(4), &used);
      if (used != shape.size() - 4) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("bad exponential profile '" + shape + "', expected exp:<decay>");
    }
    return exponential(paths, decay, total_power);
  }
  throw ConfigError("unknown power delay profile '" + shape + "'");
}

double PowerDelayProfile::total_power() const {
  return std::accumulate(taps_.begin(), taps_.end(), 0.0);
}

bool PowerDelayProfile::is_zero() const {
  return std::all_of(taps_.begin(), taps_.end(), [](double p) { return p == 0.0; });
}

ChannelMatrix::ChannelMatrix(std::size_t antenna_count, std::size_t path_count)
    : antennas_(antenna_count), paths_(path_count), taps_(antenna_count * path_count) {
  if (antenna_count == 0 || path_count == 0) throw ConfigError("channel matrix needs M >= 1 and N >= 1");
}

double ChannelMatrix::total_energy() const { return energy(taps_); }

ChannelMatrix scaled_to_unit_energy(const ChannelMatrix& h) {
  ChannelMatrix out = h;
  const double e = h.total_energy();
  if (e <= 0.0) return out;
  const double g = std::sqrt(static_cast<double>(h.antenna_count()) / e);
  for (std::size_t m = 0; m < out.antenna_count(); ++m) {
    for (auto& v : out.row(m)) v *= g;
  }
  return out;
}

ChannelMatrix generate_channel(const ChannelGenConfig& cfg) {
  ChannelMatrix h(cfg.antenna_count, cfg.pdp.path_count());
  Rng rng(cfg.seed);
  for (std::size_t m = 0; m < cfg.antenna_count; ++m) {
    for (std::size_t n = 0; n < h.path_count(); ++n) {
      // draw even for zero-power taps so the stream layout does not depend on the profile
      const cplx z = rng.complex_normal(1.0);
      h(m, n) = z * std::sqrt(cfg.pdp[n]);
    }
  }
  return h;
}

ChannelMatrix delayed(const ChannelMatrix& h, std::size_t delay) {
  ChannelMatrix out(h.antenna_count(), h.path_count() + delay);
  for (std::size_t m = 0; m < h.antenna_count(); ++m) {
    std::copy(h.row(m).begin(), h.row(m).end(), out.row(m).begin() + static_cast<std::ptrdiff_t>(delay));
  }
  return out;
}

namespace {

void require_same_shape(const ChannelMatrix& a, const ChannelMatrix& b) {
  if (a.antenna_count() != b.antenna_count() || a.path_count() != b.path_count()) {
    throw ConfigError("channel matrices have different dimensions");
  }
}

}  // namespace

cplx row_cross_correlation(const ChannelMatrix& a, const ChannelMatrix& b, std::size_t m) {
  require_same_shape(a, b);
  if (m >= a.antenna_count()) throw ConfigError("antenna index out of range");
  const double na = energy(a.row(m));
  const double nb = energy(b.row(m));
  if (na == 0.0 || nb == 0.0) throw DegenerateInputError("zero-norm channel row");
  // <a, b> = sum a conj(b) = conj(sum conj(a) b)
  return std::conj(dot_conj(a.row(m), b.row(m))) / std::sqrt(na * nb);
}

double normalized_self_energy(const ChannelMatrix& h, double p) {
  if (!(p > 0.0)) throw ConfigError("average power must be positive");
  return h.total_energy() / p;
}

cplx interference_cross_energy(const ChannelMatrix& a, const ChannelMatrix& b, RowNormalization mode) {
  require_same_shape(a, b);
  const double scale =
      mode == RowNormalization::UnitVariance ? std::sqrt(static_cast<double>(a.path_count())) : 1.0;
  cplx sum{0.0, 0.0};
  for (std::size_t m = 0; m < a.antenna_count(); ++m) sum += row_cross_correlation(a, b, m);
  return sum * scale;
}

AntennaSignals propagate(const ChannelMatrix& h, std::span<const cplx> tx, double scale) {
  AntennaSignals rx(h.antenna_count(), CVec(tx.empty() ? 0 : tx.size() + h.path_count() - 1));
  propagate_accumulate(h, tx, scale, rx);
  return rx;
}

void propagate_accumulate(const ChannelMatrix& h, std::span<const cplx> tx, double scale,
                          AntennaSignals& rx) {
  if (rx.size() != h.antenna_count()) throw ConfigError("receive buffer antenna count mismatch");
  for (std::size_t m = 0; m < h.antenna_count(); ++m) convolve_accumulate(h.row(m), tx, scale, rx[m]);
}

}  // namespace mdma::channel
