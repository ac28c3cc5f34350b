// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "soundcompass/error.hpp"
#include "soundcompass/spectral.hpp"
#include "soundcompass/tensor.hpp"

// Spectral pairwise interaction features: every product of two
// unit-normalised real/imaginary planes of a multichannel spectrogram.

namespace soundcompass::spin {

inline constexpr double kDefaultEps = 1e-8;

// (re, im) / max(|z|, eps) per channel and bin. Planes keep the
// spectrogram's [re_0..re_{M-1}, im_0..im_{M-1}] order.
inline Tensor3 normalize_planes(const spectral::ComplexSpectrogram& spec, double eps = kDefaultEps) {
  detail::require(eps > 0.0, "eps must be positive");
  const std::size_t m_count = spec.mics();
  Tensor3 out(spec.planes.channels(), spec.frames(), spec.bins());
  for (std::size_t m = 0; m < m_count; ++m)
    for (std::size_t t = 0; t < spec.frames(); ++t)
      for (std::size_t f = 0; f < spec.bins(); ++f) {
        const double re = spec.planes(m, t, f);
        const double im = spec.planes(m_count + m, t, f);
        const double scale = std::max(std::hypot(re, im), eps);
        out(m, t, f) = re / scale;
        out(m_count + m, t, f) = im / scale;
      }
  return out;
}

struct SpinFeature {
  Tensor3 values;  // [(2M)^2 x T x F]; plane i*2M + j holds n_i * n_j
  std::size_t source_channels = 0;  // 2M

  std::size_t plane_index(std::size_t i, std::size_t j) const { return i * source_channels + j; }
  std::size_t mics() const { return source_channels / 2; }
};

inline SpinFeature spin_forward(const spectral::ComplexSpectrogram& spec, double eps = kDefaultEps) {
  detail::require(spec.planes.channels() >= 2 && spec.planes.channels() % 2 == 0,
                  "spectrogram needs 2M planes");
  const Tensor3 n = normalize_planes(spec, eps);
  const std::size_t c = n.channels();
  SpinFeature feat{Tensor3(c * c, n.frames(), n.bins()), c};
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j)
      for (std::size_t t = 0; t < n.frames(); ++t) {
        const auto a = n.row(i, t);
        const auto b = n.row(j, t);
        auto out = feat.values.row(i * c + j, t);
        for (std::size_t f = 0; f < n.bins(); ++f) out[f] = a[f] * b[f];
      }
  return feat;
}

// Wrapped phase difference phi_i - phi_j per (t, f), read back from the
// product planes through the angle-difference identities.
inline Tensor3 recover_ipd(const SpinFeature& feat, std::size_t mic_i, std::size_t mic_j) {
  const std::size_t m_count = feat.mics();
  detail::require(mic_i < m_count && mic_j < m_count,
                  "mic index out of range for " + std::to_string(m_count) + " mics");
  const std::size_t ci = mic_i, si = m_count + mic_i;
  const std::size_t cj = mic_j, sj = m_count + mic_j;
  const auto& v = feat.values;
  Tensor3 out(1, v.frames(), v.bins());
  for (std::size_t t = 0; t < v.frames(); ++t)
    for (std::size_t f = 0; f < v.bins(); ++f) {
      const double cos_diff = v(feat.plane_index(ci, cj), t, f) + v(feat.plane_index(si, sj), t, f);
      const double sin_diff = v(feat.plane_index(si, cj), t, f) - v(feat.plane_index(ci, sj), t, f);
      out(0, t, f) = std::atan2(sin_diff, cos_diff);
    }
  return out;
}

// Optional level side feature: log(max(|z|, eps)) per channel, [M x T x F].
inline Tensor3 log_magnitudes(const spectral::ComplexSpectrogram& spec, double eps = kDefaultEps) {
  detail::require(eps > 0.0, "eps must be positive");
  const std::size_t m_count = spec.mics();
  Tensor3 out(m_count, spec.frames(), spec.bins());
  for (std::size_t m = 0; m < m_count; ++m)
    for (std::size_t t = 0; t < spec.frames(); ++t)
      for (std::size_t f = 0; f < spec.bins(); ++f)
        out(m, t, f) = std::log(std::max(std::abs(spec.bin(m, t, f)), eps));
  return out;
}

}  // namespace soundcompass::spin
