#include "mdma/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace mdma {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag, std::uint64_t index) {
  return splitmix64(splitmix64(parent ^ fnv1a64(tag)) + index);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ConfigError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<std::int64_t>(v % span);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

cplx Rng::complex_normal(double variance) {
  const double sd = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {re * sd, im * sd};
}

Bits random_bits(Rng& rng, std::size_t count) {
  Bits bits(count);
  for (auto& b : bits) b = rng.bit();
  return bits;
}

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b) {
  const std::size_t n = std::min(a.size(), b.size());
  const double* pa = reinterpret_cast<const double*>(a.data());
  const double* pb = reinterpret_cast<const double*>(b.data());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = pa[2 * i], ai = pa[2 * i + 1];
    const double br = pb[2 * i], bi = pb[2 * i + 1];
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double energy(std::span<const cplx> a) {
  double e = 0.0;
  for (const auto& z : a) e += std::norm(z);
  return e;
}

void convolve_accumulate(std::span<const cplx> h, std::span<const cplx> x, double scale,
                         std::span<cplx> out) {
  if (h.empty() || x.empty()) return;
  if (out.size() < x.size() + h.size() - 1) throw ConfigError("convolve_accumulate: output too short");
  const double* px = reinterpret_cast<const double*>(x.data());
  double* po = reinterpret_cast<double*>(out.data());
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double hr = h[n].real() * scale, hi = h[n].imag() * scale;
    if (hr == 0.0 && hi == 0.0) continue;
    double* o = po + 2 * n;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double xr = px[2 * k], xi = px[2 * k + 1];
      o[2 * k] += hr * xr - hi * xi;
      o[2 * k + 1] += hr * xi + hi * xr;
    }
  }
}

CVec convolve(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.empty() || b.empty()) return {};
  CVec out(a.size() + b.size() - 1);
  convolve_accumulate(a, b, 1.0, out);
  return out;
}

void add_awgn(std::span<cplx> samples, double noise_power, Rng& rng) {
  if (noise_power <= 0.0) return;
  for (auto& s : samples) s += rng.complex_normal(noise_power);
}

void add_awgn(AntennaSignals& signals, double noise_power, Rng& rng) {
  for (auto& row : signals) add_awgn(std::span<cplx>(row), noise_power, rng);
}

unsigned worker_count() {
  if (const char* env = std::getenv("MDMA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mdma
