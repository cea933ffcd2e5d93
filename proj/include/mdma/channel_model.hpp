#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdma/common.hpp"

namespace mdma::channel {

/// Average tap power versus delay. Entries are linear, non-negative; their sum is the
/// user's average received power per antenna. An all-zero profile is representable
/// (silent user) but rejected by operations that need a peak.
class PowerDelayProfile {
 public:
  explicit PowerDelayProfile(std::vector<double> tap_powers);

  static PowerDelayProfile uniform(std::size_t paths, double total_power = 1.0);
  /// Tap n has power proportional to exp(-n / decay), normalized to total_power.
  static PowerDelayProfile exponential(std::size_t paths, double decay, double total_power = 1.0);
  /// Parses `uniform` or `exp:<decay>`.
  static PowerDelayProfile from_name(const std::string& shape, std::size_t paths,
                                     double total_power = 1.0);

  std::size_t path_count() const { return taps_.size(); }
  std::span<const double> tap_powers() const { return taps_; }
  double operator[](std::size_t n) const { return taps_[n]; }
  double total_power() const;
  bool is_zero() const;

 private:
  std::vector<double> taps_;
};

/// M x N matrix of complex taps, taps(m, n) = h^(m)(n). Row-major storage.
class ChannelMatrix {
 public:
  /// Empty 0 x 0 matrix.
  ChannelMatrix() = default;
  ChannelMatrix(std::size_t antenna_count, std::size_t path_count);

  std::size_t antenna_count() const { return antennas_; }
  std::size_t path_count() const { return paths_; }

  cplx& operator()(std::size_t m, std::size_t n) { return taps_[m * paths_ + n]; }
  const cplx& operator()(std::size_t m, std::size_t n) const { return taps_[m * paths_ + n]; }

  std::span<cplx> row(std::size_t m) { return {taps_.data() + m * paths_, paths_}; }
  std::span<const cplx> row(std::size_t m) const { return {taps_.data() + m * paths_, paths_}; }

  std::span<const cplx> data() const { return taps_; }

  /// Sum over all entries of |h|^2.
  double total_energy() const;

  friend bool operator==(const ChannelMatrix&, const ChannelMatrix&) = default;

 private:
  std::size_t antennas_ = 0;
  std::size_t paths_ = 0;
  CVec taps_;
};

struct ChannelGenConfig {
  std::size_t antenna_count;
  PowerDelayProfile pdp;
  std::uint64_t seed;
};

/// Independent circularly-symmetric Gaussian taps, variance pdp[n] for column n.
ChannelMatrix generate_channel(const ChannelGenConfig& cfg);

/// Copy of h scaled so that total_energy() == antenna_count (unchanged when h is all zero).
ChannelMatrix scaled_to_unit_energy(const ChannelMatrix& h);

/// Prepends `delay` zero taps to every row (propagation delay in whole samples).
ChannelMatrix delayed(const ChannelMatrix& h, std::size_t delay);

/// Normalized cross-correlation of row m: <a_m, b_m> / (|a_m| |b_m|), where
/// <x, y> = sum_n x[n] conj(y[n]).
cplx row_cross_correlation(const ChannelMatrix& a, const ChannelMatrix& b, std::size_t m);

/// sum_m |H(m,:)|^2 / p.
double normalized_self_energy(const ChannelMatrix& h, double p);

/// How each row's cross-correlation is scaled before summing over antennas.
enum class RowNormalization {
  /// sqrt(N) * rho_m: unit-variance terms for independent rows, so the sum has variance M.
  UnitVariance,
  /// rho_m as defined by row_cross_correlation; the sum has variance M / N.
  Realized,
};

/// sum_m of the per-row normalized cross-correlations of two users.
cplx interference_cross_energy(const ChannelMatrix& a, const ChannelMatrix& b,
                               RowNormalization mode = RowNormalization::UnitVariance);

/// Per-antenna linear convolution of the transmitted signal with the channel row:
/// out[m] = scale * (h^(m) * x), length x.size() + N - 1.
AntennaSignals propagate(const ChannelMatrix& h, std::span<const cplx> tx, double scale = 1.0);

/// Same as propagate but adds into `rx`, which must have M rows of sufficient length.
void propagate_accumulate(const ChannelMatrix& h, std::span<const cplx> tx, double scale,
                          AntennaSignals& rx);

}  // namespace mdma::channel
