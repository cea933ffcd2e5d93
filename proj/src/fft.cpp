#include "mdma/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace mdma::dsp {

namespace {

// FFTW's planner is not thread-safe; plans are created once per (size, sign) under a lock
// and executed through the thread-safe new-array interface.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    CVec in(n), out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

CVec transform(std::span<const cplx> x, int sign) {
  if (x.empty()) return {};
  fftw_plan plan = cache().get(x.size(), sign);
  CVec in(x.begin(), x.end());
  CVec out(x.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace

CVec fft(std::span<const cplx> x) { return transform(x, FFTW_FORWARD); }
CVec ifft(std::span<const cplx> x) { return transform(x, FFTW_BACKWARD); }

}  // namespace mdma::dsp
