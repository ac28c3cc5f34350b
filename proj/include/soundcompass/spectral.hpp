// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "soundcompass/error.hpp"
#include "soundcompass/fft.hpp"
#include "soundcompass/tensor.hpp"
#include "soundcompass/waveform.hpp"

namespace soundcompass::spectral {

inline constexpr std::size_t kDefaultFftSize = 512;
inline constexpr std::size_t kDefaultHop = 256;

// Gaussian analysis/synthesis window. mean and std are fractions of the
// window length.
struct GaussianWindowParams {
  double mean = 0.5;
  double std = 0.25;
  std::size_t length = kDefaultFftSize;
};

inline void validate(const GaussianWindowParams& p) {
  detail::require(p.length >= 2, "window length must be at least 2");
  detail::require(std::isfinite(p.std) && p.std > 0.0, "window std must be positive");
  detail::require(std::isfinite(p.mean) && p.mean >= 0.0 && p.mean <= 1.0,
                  "window mean must lie in [0, 1]");
}

// w[i] = exp(-((i/(L-1) - mean)^2 / (2 std^2)))
inline std::vector<double> make_gaussian_window(const GaussianWindowParams& p) {
  validate(p);
  std::vector<double> w(p.length);
  const double denom = static_cast<double>(p.length - 1);
  for (std::size_t i = 0; i < p.length; ++i) {
    const double d = static_cast<double>(i) / denom - p.mean;
    w[i] = std::exp(-(d * d) / (2.0 * p.std * p.std));
  }
  return w;
}

// Real parts in planes [0, M), imaginary parts in planes [M, 2M).
struct ComplexSpectrogram {
  Tensor3 planes;
  std::size_t frame_hop = kDefaultHop;
  std::size_t fft_size = kDefaultFftSize;
  int sample_rate = 16000;

  std::size_t mics() const { return planes.channels() / 2; }
  std::size_t frames() const { return planes.frames(); }
  std::size_t bins() const { return planes.bins(); }

  std::complex<double> bin(std::size_t m, std::size_t t, std::size_t f) const {
    return {planes(m, t, f), planes(mics() + m, t, f)};
  }
  void set_bin(std::size_t m, std::size_t t, std::size_t f, std::complex<double> v) {
    planes(m, t, f) = v.real();
    planes(mics() + m, t, f) = v.imag();
  }
};

// Frames are centred on multiples of the hop: frame t covers input samples
// [t*hop - fft_size/2, t*hop + fft_size/2), zero-padded outside the signal.
// The count ceil(S/hop) + 1 puts a frame centre at or beyond the last sample.
inline std::size_t num_frames(std::size_t samples, std::size_t hop) {
  return (samples + hop - 1) / hop + 1;
}

inline long frame_start(std::size_t t, std::size_t hop, std::size_t fft_size) {
  return static_cast<long>(t * hop) - static_cast<long>(fft_size / 2);
}

inline ComplexSpectrogram stft(const MultichannelWaveform& w, const GaussianWindowParams& p,
                               std::size_t fft_size = kDefaultFftSize,
                               std::size_t hop = kDefaultHop) {
  detail::require(w.samples() > 0 && w.channels() > 0, "stft of an empty signal");
  detail::require(hop > 0, "hop must be positive");
  detail::require(hop <= fft_size, "hop must not exceed fft_size");
  detail::require(p.length == fft_size, "window length must equal fft_size");
  const auto window = make_gaussian_window(p);
  const std::size_t m_count = w.channels();
  const std::size_t frames = num_frames(w.samples(), hop);
  const std::size_t bins = fft_size / 2 + 1;
  const long s_len = static_cast<long>(w.samples());

  ComplexSpectrogram spec{Tensor3(2 * m_count, frames, bins), hop, fft_size, w.sample_rate()};
  std::vector<double> frame(fft_size);
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto x = w.channel(m);
    for (std::size_t t = 0; t < frames; ++t) {
      const long start = frame_start(t, hop, fft_size);
      for (std::size_t i = 0; i < fft_size; ++i) {
        const long n = start + static_cast<long>(i);
        frame[i] = (n >= 0 && n < s_len) ? window[i] * x[static_cast<std::size_t>(n)] : 0.0;
      }
      const auto X = fft::rfft(frame);
      for (std::size_t f = 0; f < bins; ++f) {
        spec.planes(m, t, f) = X[f].real();
        spec.planes(m_count + m, t, f) = X[f].imag();
      }
    }
  }
  return spec;
}

// Per-sample synthesis normaliser sum_t w[n - start_t]^2 over the frames of
// a signal of out_len samples.
inline std::vector<double> window_energy(const GaussianWindowParams& p, std::size_t fft_size,
                                         std::size_t hop, std::size_t out_len) {
  const auto window = make_gaussian_window(p);
  std::vector<double> energy(out_len, 0.0);
  const std::size_t frames = num_frames(out_len, hop);
  for (std::size_t t = 0; t < frames; ++t) {
    const long start = frame_start(t, hop, fft_size);
    for (std::size_t i = 0; i < fft_size; ++i) {
      const long n = start + static_cast<long>(i);
      if (n >= 0 && n < static_cast<long>(out_len))
        energy[static_cast<std::size_t>(n)] += window[i] * window[i];
    }
  }
  return energy;
}

// Relative floor on the synthesis normaliser; samples below
// kMinWindowEnergy * max(energy) cannot be reconstructed reliably.
inline constexpr double kMinWindowEnergy = 1e-8;

inline bool window_energy_ok(const GaussianWindowParams& p, std::size_t fft_size, std::size_t hop,
                             std::size_t out_len, double min_relative = kMinWindowEnergy) {
  const auto e = window_energy(p, fft_size, hop, out_len);
  const double peak = *std::max_element(e.begin(), e.end());
  return std::all_of(e.begin(), e.end(), [&](double v) { return v >= min_relative * peak && v > 0.0; });
}

// Least-squares overlap-add: x[n] = sum_t w y_t / sum_t w^2.
inline MultichannelWaveform istft(const ComplexSpectrogram& spec, const GaussianWindowParams& p,
                                  std::size_t out_len, double min_relative = kMinWindowEnergy) {
  const std::size_t fft_size = spec.fft_size;
  const std::size_t hop = spec.frame_hop;
  detail::require(out_len > 0, "istft output length must be positive");
  detail::require(p.length == fft_size, "window length must equal fft_size");
  detail::require(spec.bins() == fft_size / 2 + 1, "spectrogram bins do not match fft_size");
  detail::require(spec.planes.channels() % 2 == 0 && spec.planes.channels() > 0,
                  "spectrogram needs an even, positive number of planes");
  detail::require(spec.frames() >= num_frames(out_len, hop),
                  "spectrogram has too few frames for the requested length");

  const auto window = make_gaussian_window(p);
  const auto energy = window_energy(p, fft_size, hop, out_len);
  const double peak = *std::max_element(energy.begin(), energy.end());
  for (std::size_t n = 0; n < out_len; ++n) {
    if (!(energy[n] > 0.0) || energy[n] < min_relative * peak)
      throw InvalidInput("istft window energy underflow at sample " + std::to_string(n) +
                         " (energy " + std::to_string(energy[n]) +
                         "); window too narrow for the hop");
  }

  const std::size_t m_count = spec.mics();
  const std::size_t frames = num_frames(out_len, hop);
  MultichannelWaveform out(m_count, out_len, spec.sample_rate);
  std::vector<fft::Complex> X(spec.bins());
  for (std::size_t m = 0; m < m_count; ++m) {
    auto y = out.channel(m);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < X.size(); ++f) X[f] = spec.bin(m, t, f);
      const auto frame = fft::irfft(X, fft_size);
      const long start = frame_start(t, hop, fft_size);
      for (std::size_t i = 0; i < fft_size; ++i) {
        const long n = start + static_cast<long>(i);
        if (n >= 0 && n < static_cast<long>(out_len)) y[static_cast<std::size_t>(n)] += window[i] * frame[i];
      }
    }
    for (std::size_t n = 0; n < out_len; ++n) y[n] /= energy[n];
  }
  return out;
}

}  // namespace soundcompass::spectral
