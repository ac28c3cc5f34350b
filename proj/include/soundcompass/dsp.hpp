// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace soundcompass::dsp {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

// Hann-windowed sinc used for every fractional delay in the toolkit. The
// window spans +/- kSincHalfWidth samples, so an integer delay touches 81 taps.
inline constexpr double kSincHalfWidth = 41.0;

inline double sinc(double t) {
  if (t == 0.0) return 1.0;
  const double x = std::numbers::pi * t;
  return std::sin(x) / x;
}

// Kernel value at offset t (samples) from the delayed impulse centre.
inline double windowed_sinc(double t) {
  if (std::abs(t) >= kSincHalfWidth) return 0.0;
  const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * t / kSincHalfWidth));
  return w * sinc(t);
}

// Adds amplitude * delta(n - delay) into out, band-limited by windowed_sinc.
// Taps falling outside [0, out.size()) are dropped.
inline void add_fractional_impulse(std::span<double> out, double delay, double amplitude) {
  const long lo = static_cast<long>(std::ceil(delay - kSincHalfWidth));
  const long hi = static_cast<long>(std::floor(delay + kSincHalfWidth));
  const long n = static_cast<long>(out.size());
  for (long i = std::max(lo, 0L); i <= std::min(hi, n - 1); ++i)
    out[static_cast<std::size_t>(i)] += amplitude * windowed_sinc(static_cast<double>(i) - delay);
}

// y[n] = x(n - delay), same length as x, zero outside the input support.
// delay may be negative (an advance).
inline std::vector<double> delay_signal(std::span<const double> x, double delay) {
  std::vector<double> y(x.size(), 0.0);
  if (x.empty()) return y;
  const double rounded = std::round(delay);
  if (std::abs(delay - rounded) < 1e-12) {
    const long shift = static_cast<long>(rounded);
    const long n = static_cast<long>(x.size());
    for (long i = 0; i < n; ++i) {
      const long src = i - shift;
      if (src >= 0 && src < n) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(src)];
    }
    return y;
  }
  // Kernel taps h[k] = windowed_sinc(k - delay) for k in [klo, khi].
  const long klo = static_cast<long>(std::ceil(delay - kSincHalfWidth));
  const long khi = static_cast<long>(std::floor(delay + kSincHalfWidth));
  std::vector<double> h;
  h.reserve(static_cast<std::size_t>(khi - klo + 1));
  for (long k = klo; k <= khi; ++k) h.push_back(windowed_sinc(static_cast<double>(k) - delay));
  const long n = static_cast<long>(x.size());
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = klo; k <= khi; ++k) {
      const long src = i - k;
      if (src < 0 || src >= n) continue;
      acc += h[static_cast<std::size_t>(k - klo)] * x[static_cast<std::size_t>(src)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double wrap_phase(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

}  // namespace soundcompass::dsp
