#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mdma {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using Bits = std::vector<std::uint8_t>;

/// One sample stream per base-station antenna.
using AntennaSignals = std::vector<CVec>;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or mismatched dimensions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input that is well-formed but carries no usable energy (zero rows, all-zero profiles).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Too few samples or bits for the requested window, or a malformed field layout.
class FramingError : public Error {
 public:
  using Error::Error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed splitting rule used throughout the project:
///   derive_seed(parent, tag, index) = splitmix64(splitmix64(parent ^ fnv1a64(tag)) + index)
/// Every trial, user and antenna stream gets its own seed from the scenario's master seed,
/// so results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index = 0);

/// Seedable generator. The engine is mt19937_64 and all distributions are implemented
/// here (not via <random> distributions) so output is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Bits random_bits(Rng& rng, std::size_t count);

/// sum_i conj(a[i]) * b[i]
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b);

/// sum_i |a[i]|^2
double energy(std::span<const cplx> a);

/// out[k + n] += h[n] * x[k] * scale, out must hold x.size() + h.size() - 1 samples.
void convolve_accumulate(std::span<const cplx> h, std::span<const cplx> x, double scale,
                         std::span<cplx> out);

/// Full linear convolution.
CVec convolve(std::span<const cplx> a, std::span<const cplx> b);

/// Adds complex white Gaussian noise of the given per-sample power.
void add_awgn(std::span<cplx> samples, double noise_power, Rng& rng);
void add_awgn(AntennaSignals& signals, double noise_power, Rng& rng);

/// Runs body(i) for i in [0, count) on a pool of worker threads. Each index is processed
/// exactly once; callers store results by index so output order is fixed.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Worker count used by parallel_for (MDMA_THREADS overrides hardware_concurrency).
unsigned worker_count();

}  // namespace mdma
