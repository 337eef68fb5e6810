#include "nsp/spectrum.hpp"

#include "nsp/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace nsp {

namespace {

struct Plan {
  std::size_t n = 0;
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(std::size_t size) : n(size) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Plan() {
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
};

// The FFTW planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

Plan& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Plan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::lock_guard lock(planner_mutex());
    it = cache.emplace(n, std::make_unique<Plan>(n)).first;
  }
  return *it->second;
}

}  // namespace

std::vector<double> power_spectrum(std::span<const double> x, std::size_t nfft) {
  if (nfft == 0) fail(ErrorKind::InvalidArgument, "power_spectrum: nfft must be positive");
  Plan& p = plan_for(nfft);
  const std::size_t used = std::min(x.size(), nfft);
  std::copy_n(x.begin(), used, p.in);
  std::fill(p.in + used, p.in + nfft, 0.0);
  fftw_execute(p.plan);

  std::vector<double> power(nfft / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    power[k] = p.out[k][0] * p.out[k][0] + p.out[k][1] * p.out[k][1];
  }
  return power;
}

}  // namespace nsp
