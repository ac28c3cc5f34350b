// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "soundcompass/clue.hpp"
#include "soundcompass/dsp.hpp"
#include "soundcompass/error.hpp"
#include "soundcompass/metrics.hpp"
#include "soundcompass/parallel.hpp"
#include "soundcompass/scene.hpp"
#include "soundcompass/waveform.hpp"

namespace soundcompass::beamformer {

// Far-field arrival delays tau_m = -(u . r_m) / c relative to the array center.
inline std::vector<double> steering_delays(const std::vector<Vec3>& offsets, const clue::DoAClue& d) {
  const auto u = d.unit_vector();
  std::vector<double> tau;
  tau.reserve(offsets.size());
  for (const auto& r : offsets) tau.push_back(-dot(u, r) / dsp::kSpeedOfSound);
  return tau;
}

// gains[f][m] = exp(-i 2 pi f_hz tau_m) on the rfft grid of fft_size.
inline std::vector<std::vector<std::complex<double>>> steering_vector(const std::vector<double>& delays,
                                                                      std::size_t fft_size, int sample_rate) {
  std::vector<std::vector<std::complex<double>>> g(fft_size / 2 + 1);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const double hz = static_cast<double>(f) * sample_rate / static_cast<double>(fft_size);
    for (double tau : delays) g[f].push_back(std::polar(1.0, -2.0 * std::numbers::pi * hz * tau));
  }
  return g;
}

// Aligns every channel on the steered direction, averages them, and delays
// the average back onto each microphone so the output keeps the mixture's
// channel layout.
inline MultichannelWaveform delay_and_sum(const MultichannelWaveform& mixture, const std::vector<Vec3>& offsets,
                                          const clue::DoAClue& d) {
  detail::require(std::isfinite(d.polar()) && std::isfinite(d.azimuth()), "steering direction is not finite");
  detail::require(offsets.size() == mixture.channels(), "array geometry has " + std::to_string(offsets.size()) +
                                                            " microphones but the mixture has " +
                                                            std::to_string(mixture.channels()) + " channels");
  if (mixture.channels() == 1) return mixture;
  const auto tau = steering_delays(offsets, d);
  const double fs = mixture.sample_rate();
  const std::size_t m_count = mixture.channels();
  std::vector<double> sum(mixture.samples(), 0.0);
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto aligned = dsp::delay_signal(mixture.channel(m), -tau[m] * fs);
    for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += aligned[n];
  }
  for (double& v : sum) v /= static_cast<double>(m_count);
  MultichannelWaveform out(m_count, mixture.samples(), mixture.sample_rate());
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto y = dsp::delay_signal(sum, tau[m] * fs);
    std::copy(y.begin(), y.end(), out.channel(m).begin());
  }
  return out;
}

struct ContourPoint {
  double d_az_deg = 0.0;
  double d_el_deg = 0.0;
  double si_snri_db = 0.0;
};

// Offsets -span..span in steps of `step` (the span is rounded to a whole
// number of steps).
inline std::vector<double> contour_offsets(double span_deg, double step_deg) {
  detail::require(std::isfinite(span_deg) && span_deg >= 0.0, "span must be non-negative");
  detail::require(std::isfinite(step_deg) && step_deg > 0.0, "step must be positive");
  const long n = std::lround(span_deg / step_deg);
  std::vector<double> out;
  for (long i = -n; i <= n; ++i) out.push_back(static_cast<double>(i) * step_deg);
  return out;
}

// SI-SNRi of delay-and-sum estimates steered at target + (d_az, d_el) over
// a square grid, azimuth offset varying slowest. Steered elevations are
// clamped to [-90, 90] degrees.
inline std::vector<ContourPoint> steering_contour(const MultichannelWaveform& mixture,
                                                  const MultichannelWaveform& reference,
                                                  const std::vector<Vec3>& offsets, const clue::DoAClue& target,
                                                  double span_deg, double step_deg, std::size_t jobs = 1) {
  const auto grid = contour_offsets(span_deg, step_deg);
  const double el0 = target.elevation() * 180.0 / std::numbers::pi;
  const double az0 = target.azimuth() * 180.0 / std::numbers::pi;
  std::vector<ContourPoint> out(grid.size() * grid.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const double d_az = grid[i / grid.size()];
    const double d_el = grid[i % grid.size()];
    const auto d = clue::DoAClue::from_degrees(std::clamp(el0 + d_el, -90.0, 90.0), az0 + d_az);
    const auto est = delay_and_sum(mixture, offsets, d);
    out[i] = {d_az, d_el, metrics::si_snr_i(est, reference, mixture)};
  });
  return out;
}

}  // namespace soundcompass::beamformer
