#pragma once

#include <span>

#include "mdma/common.hpp"

namespace mdma::dsp {

/// Unitary DFT (scaled by 1/sqrt(N)); safe to call concurrently.
CVec fft(std::span<const cplx> x);
/// Unitary inverse DFT.
CVec ifft(std::span<const cplx> x);

/// Physical (signed) subcarrier index to DFT bin, e.g. -1 -> N-1.
inline std::size_t bin_index(int frequency, std::size_t fft_size) {
  const auto n = static_cast<long>(fft_size);
  return static_cast<std::size_t>(((frequency % n) + n) % n);
}

}  // namespace mdma::dsp
