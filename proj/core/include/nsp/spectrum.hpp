#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsp {

// One-sided squared FFT magnitudes |X_k|^2, k = 0 .. nfft/2, of `x`
// zero-padded (or truncated) to `nfft` points. No window, no scaling.
//
// Backed by FFTW with FFTW_ESTIMATE plans, so the same input always maps to
// the same bits. Plans are cached per size; safe to call from many threads.
std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft);

}  // namespace nsp
