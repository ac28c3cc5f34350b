// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "soundcompass/error.hpp"

// Thin wrapper over FFTW3's real-to-complex and complex-to-real transforms.
// Plans are created once per size under a lock and then executed through
// the new-array interface, which FFTW documents as thread-safe.

namespace soundcompass::fft {

using Complex = std::complex<double>;

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(std::size_t n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> real(n);
    std::vector<Complex> spec(n / 2 + 1);
    auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cspec, flags);
    p.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cspec, real.data(), flags);
    plans_.emplace(n, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

}  // namespace detail

// X[k] = sum_n x[n] exp(-2 pi i k n / N), k = 0..N/2.
inline std::vector<Complex> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  soundcompass::detail::require(n >= 1, "rfft of empty input");
  auto plan = detail::PlanCache::instance().get(n);
  std::vector<double> in(x.begin(), x.end());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(plan.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Inverse of rfft including the 1/N factor. Imaginary parts of the DC and
// Nyquist bins are ignored.
inline std::vector<double> irfft(std::span<const Complex> spec, std::size_t n) {
  soundcompass::detail::require(spec.size() == n / 2 + 1, "irfft size mismatch");
  auto plan = detail::PlanCache::instance().get(n);
  std::vector<Complex> in(spec.begin(), spec.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plan.inverse, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Full linear convolution, length a.size() + b.size() - 1.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  auto fa = rfft(pa);
  auto fb = rfft(pb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto y = irfft(fa, n);
  y.resize(out_len);
  return y;
}

}  // namespace soundcompass::fft
