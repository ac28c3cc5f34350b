// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "soundcompass/dsp.hpp"
#include "soundcompass/error.hpp"
#include "soundcompass/fft.hpp"
#include "soundcompass/scene.hpp"
#include "soundcompass/spectral.hpp"
#include "soundcompass/waveform.hpp"

namespace soundcompass::metrics {

inline constexpr double kDbCap = 100.0;
inline constexpr double kSilenceFloor = 1e-20;  // energy below this marks a channel silent
inline constexpr double kBceEps = 1e-7;

inline double capped_db(double signal_energy, double noise_energy) {
  if (noise_energy <= 0.0) return signal_energy > 0.0 ? kDbCap : -kDbCap;
  if (signal_energy <= 0.0) return -kDbCap;
  return std::clamp(10.0 * std::log10(signal_energy / noise_energy), -kDbCap, kDbCap);
}

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), "signals differ in length (" + std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()) + ")");
}

// 10 log10(|ref|^2 / |ref - est|^2), capped at +/-100 dB.
inline double snr(std::span<const double> est, std::span<const double> ref) {
  require_same_length(est, ref);
  const double e_ref = dsp::energy(ref);
  detail::require(e_ref > 0.0, "reference signal is all zero");
  double e_err = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) e_err += (ref[i] - est[i]) * (ref[i] - est[i]);
  return capped_db(e_ref, e_err);
}

// Scale-invariant SNR: est is projected onto ref before the energy ratio.
// est is first divided by its peak magnitude. Whenever k * est is exactly
// representable, k * est / |k * peak| rounds to the same value as
// sign(k) * est / peak, so the result is bit-identical under such scalings.
inline double si_snr(std::span<const double> est, std::span<const double> ref) {
  require_same_length(est, ref);
  const double e_ref = dsp::energy(ref);
  detail::require(e_ref > 0.0, "reference signal is all zero");
  double peak = 0.0;
  for (double v : est) peak = std::max(peak, std::abs(v));
  std::vector<double> unit(est.begin(), est.end());
  if (peak > 0.0)
    for (double& v : unit) v /= peak;
  const double alpha = dsp::dot(unit, ref) / e_ref;
  double e_target = 0.0, e_res = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i) {
    const double s = alpha * ref[i];
    e_target += s * s;
    e_res += (unit[i] - s) * (unit[i] - s);
  }
  return capped_db(e_target, e_res);
}

using SignalMetric = double (*)(std::span<const double>, std::span<const double>);

inline void require_same_shape(const MultichannelWaveform& a, const MultichannelWaveform& b) {
  detail::require(a.channels() == b.channels() && a.samples() == b.samples(),
                  "waveforms differ in shape");
}

// Channel-averaged metric.
inline double multichannel(SignalMetric metric, const MultichannelWaveform& est, const MultichannelWaveform& ref) {
  require_same_shape(est, ref);
  double s = 0.0;
  for (std::size_t m = 0; m < est.channels(); ++m) s += metric(est.channel(m), ref.channel(m));
  return s / static_cast<double>(est.channels());
}

// Improvement over the unprocessed mixture, per channel then averaged. The
// cap is applied to each term before subtracting.
inline double improvement(SignalMetric metric, const MultichannelWaveform& est, const MultichannelWaveform& ref,
                          const MultichannelWaveform& mixture) {
  require_same_shape(est, ref);
  require_same_shape(mixture, ref);
  double s = 0.0;
  for (std::size_t m = 0; m < est.channels(); ++m)
    s += metric(est.channel(m), ref.channel(m)) - metric(mixture.channel(m), ref.channel(m));
  return s / static_cast<double>(est.channels());
}

inline double snr_i(const MultichannelWaveform& est, const MultichannelWaveform& ref,
                    const MultichannelWaveform& mixture) {
  return improvement(&snr, est, ref, mixture);
}

inline double si_snr_i(const MultichannelWaveform& est, const MultichannelWaveform& ref,
                       const MultichannelWaveform& mixture) {
  return improvement(&si_snr, est, ref, mixture);
}

inline void require_pair(std::size_t channels, std::size_t i, std::size_t j) {
  detail::require(i != j, "pair indices must differ");
  detail::require(i < channels && j < channels, "pair index out of range");
}

// 10 log10(E_i / E_j); nullopt when either channel is silent.
inline std::optional<double> ild(const MultichannelWaveform& w, std::size_t i, std::size_t j) {
  require_pair(w.channels(), i, j);
  const double ei = dsp::energy(w.channel(i));
  const double ej = dsp::energy(w.channel(j));
  if (ei < kSilenceFloor || ej < kSilenceFloor) return std::nullopt;
  return 10.0 * std::log10(ei / ej);
}

// Wrapped phase difference phi_i - phi_j per (t, f), shape [1 x T x F].
inline Tensor3 ipd(const spectral::ComplexSpectrogram& spec, std::size_t i, std::size_t j) {
  require_pair(spec.mics(), i, j);
  Tensor3 out(1, spec.frames(), spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t)
    for (std::size_t f = 0; f < spec.bins(); ++f)
      out(0, t, f) = std::arg(spec.bin(i, t, f) * std::conj(spec.bin(j, t, f)));
  return out;
}

// Delay of channel j relative to channel i in seconds (positive when j
// lags), from the peak of the phase-transformed cross-correlation within
// +/- max_lag_s, refined by a 3-point parabola. nullopt for silent channels.
inline std::optional<double> gcc_phat_itd(const MultichannelWaveform& w, std::size_t i, std::size_t j,
                                          double max_lag_s) {
  require_pair(w.channels(), i, j);
  detail::require(max_lag_s > 0.0, "max_lag must be positive");
  if (dsp::energy(w.channel(i)) < kSilenceFloor || dsp::energy(w.channel(j)) < kSilenceFloor) return std::nullopt;
  const std::size_t s = w.samples();
  const std::size_t n = fft::next_pow2(2 * s);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::copy(w.channel(i).begin(), w.channel(i).end(), a.begin());
  std::copy(w.channel(j).begin(), w.channel(j).end(), b.begin());
  const auto xa = fft::rfft(a);
  const auto xb = fft::rfft(b);
  std::vector<fft::Complex> cross(xa.size());
  for (std::size_t k = 0; k < xa.size(); ++k) {
    const auto c = std::conj(xa[k]) * xb[k];
    const double mag = std::abs(c);
    cross[k] = mag > 0.0 ? c / mag : fft::Complex{};
  }
  const auto r = fft::irfft(cross, n);
  const long max_lag = std::min<long>(static_cast<long>(std::ceil(max_lag_s * w.sample_rate())),
                                      static_cast<long>(s) - 1);
  auto at = [&](long lag) { return r[static_cast<std::size_t>((lag + static_cast<long>(n)) % static_cast<long>(n))]; };
  long best = 0;
  for (long lag = -max_lag; lag <= max_lag; ++lag)
    if (at(lag) > at(best)) best = lag;
  double delta = 0.0;
  if (best > -max_lag && best < max_lag) {
    const double ym = at(best - 1), y0 = at(best), yp = at(best + 1);
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) delta = 0.5 * (ym - yp) / denom;
  }
  return (static_cast<double>(best) + delta) / w.sample_rate();
}

struct SpatialOptions {
  // 1.5 x aperture / c for the 4.2 cm tetrahedron (edge 6.86 cm).
  double max_lag_s = 1.5 * kTetrahedralRadius * std::sqrt(8.0 / 3.0) / dsp::kSpeedOfSound;
  double ipd_gate_dbfs = -60.0;
  spectral::GaussianWindowParams window{0.5, 0.25, spectral::kDefaultFftSize};
  std::size_t hop = spectral::kDefaultHop;
};

struct PairErrors {
  std::size_t i = 0, j = 0;
  std::optional<double> d_ild_db;
  std::optional<double> d_ipd_rad;
  std::optional<double> d_itd_us;
};

struct SpatialErrors {
  double d_ild_db = 0.0;
  double d_ipd_rad = 0.0;
  double d_itd_us = 0.0;
  std::vector<PairErrors> pairs;
  std::size_t undefined_pairs = 0;  // pairs missing at least one cue
};

// MAE of ILD, IPD and ITD between est and ref over all M(M-1)/2 pairs. IPD
// errors are averaged over bins where both reference channels reach
// ipd_gate_dbfs relative to a full-scale sinusoid. Aggregates skip
// undefined cues.
inline SpatialErrors spatial_errors(const MultichannelWaveform& est, const MultichannelWaveform& ref,
                                    const SpatialOptions& opt = {}) {
  require_same_shape(est, ref);
  detail::require(est.channels() >= 2, "spatial errors need at least two channels");
  auto opt_window = opt.window;
  opt_window.length = std::max<std::size_t>(opt_window.length, 2);
  const std::size_t fft_size = opt_window.length;
  const auto window = spectral::make_gaussian_window(opt_window);
  double wsum = 0.0;
  for (double v : window) wsum += v;
  const double gate = std::pow(10.0, opt.ipd_gate_dbfs / 20.0) * wsum / 2.0;
  const auto spec_est = spectral::stft(est, opt_window, fft_size, opt.hop);
  const auto spec_ref = spectral::stft(ref, opt_window, fft_size, opt.hop);

  SpatialErrors out;
  double s_ild = 0, s_ipd = 0, s_itd = 0;
  std::size_t n_ild = 0, n_ipd = 0, n_itd = 0;
  for (std::size_t i = 0; i < est.channels(); ++i)
    for (std::size_t j = i + 1; j < est.channels(); ++j) {
      PairErrors p{i, j, {}, {}, {}};
      const auto le = ild(est, i, j), lr = ild(ref, i, j);
      if (le && lr) p.d_ild_db = std::abs(*le - *lr);
      const auto te = gcc_phat_itd(est, i, j, opt.max_lag_s), tr = gcc_phat_itd(ref, i, j, opt.max_lag_s);
      if (te && tr) p.d_itd_us = std::abs(*te - *tr) * 1e6;
      double acc = 0.0;
      std::size_t count = 0;
      for (std::size_t t = 0; t < spec_ref.frames(); ++t)
        for (std::size_t f = 0; f < spec_ref.bins(); ++f) {
          const auto ri = spec_ref.bin(i, t, f), rj = spec_ref.bin(j, t, f);
          if (std::min(std::abs(ri), std::abs(rj)) < gate) continue;
          const double ipd_ref = std::arg(ri * std::conj(rj));
          const double ipd_est = std::arg(spec_est.bin(i, t, f) * std::conj(spec_est.bin(j, t, f)));
          acc += std::abs(dsp::wrap_phase(ipd_est - ipd_ref));
          ++count;
        }
      if (count > 0) p.d_ipd_rad = acc / static_cast<double>(count);
      if (p.d_ild_db) s_ild += *p.d_ild_db, ++n_ild;
      if (p.d_ipd_rad) s_ipd += *p.d_ipd_rad, ++n_ipd;
      if (p.d_itd_us) s_itd += *p.d_itd_us, ++n_itd;
      if (!p.d_ild_db || !p.d_ipd_rad || !p.d_itd_us) ++out.undefined_pairs;
      out.pairs.push_back(p);
    }
  out.d_ild_db = n_ild ? s_ild / static_cast<double>(n_ild) : 0.0;
  out.d_ipd_rad = n_ipd ? s_ipd / static_cast<double>(n_ipd) : 0.0;
  out.d_itd_us = n_itd ? s_itd / static_cast<double>(n_itd) : 0.0;
  return out;
}

struct MetricsReport {
  double snri_db = 0.0;
  double si_snri_db = 0.0;
  double d_ild_db = 0.0;
  double d_ipd_rad = 0.0;
  double d_itd_us = 0.0;
  std::vector<PairErrors> per_pair;
  std::size_t undefined_pairs = 0;
};

inline MetricsReport evaluate(const MultichannelWaveform& est, const MultichannelWaveform& ref,
                              const MultichannelWaveform& mixture, const SpatialOptions& opt = {}) {
  MetricsReport r;
  r.snri_db = snr_i(est, ref, mixture);
  r.si_snri_db = si_snr_i(est, ref, mixture);
  if (est.channels() >= 2) {
    const auto sp = spatial_errors(est, ref, opt);
    r.d_ild_db = sp.d_ild_db;
    r.d_ipd_rad = sp.d_ipd_rad;
    r.d_itd_us = sp.d_itd_us;
    r.per_pair = sp.pairs;
    r.undefined_pairs = sp.undefined_pairs;
  }
  return r;
}

struct ReportRow {
  std::string scene_id;
  std::string source_id;
  MetricsReport report;
};

// CSV with one row per (scene, source) and a trailing row of column means.
inline void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "scene_id,source_id,snri_db,si_snri_db,d_ild_db,d_ipd_rad,d_itd_us\n";
  char buf[256];
  double sums[5] = {0, 0, 0, 0, 0};
  for (const auto& r : rows) {
    const auto& m = r.report;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f", m.snri_db, m.si_snri_db, m.d_ild_db, m.d_ipd_rad,
                  m.d_itd_us);
    os << r.scene_id << "," << r.source_id << "," << buf << "\n";
    sums[0] += m.snri_db;
    sums[1] += m.si_snri_db;
    sums[2] += m.d_ild_db;
    sums[3] += m.d_ipd_rad;
    sums[4] += m.d_itd_us;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f", sums[0] / n, sums[1] / n, sums[2] / n, sums[3] / n,
                  sums[4] / n);
    os << "mean,all," << buf << "\n";
  }
}

// Mean binary cross-entropy with predictions clamped to [eps, 1 - eps].
inline double bce_loss(std::span<const double> pred, std::span<const double> target) {
  require_same_length(pred, target);
  detail::require(!pred.empty(), "BCE needs at least one frame");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    detail::require(pred[i] >= 0.0 && pred[i] <= 1.0, "BCE predictions must lie in [0, 1]");
    detail::require(target[i] == 0.0 || target[i] == 1.0, "BCE targets must be 0 or 1");
    const double p = std::clamp(pred[i], kBceEps, 1.0 - kBceEps);
    s -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
  }
  return s / static_cast<double>(pred.size());
}

struct LossWeights {
  double snr = 0.9;
  double si_snr = 0.1;
};

struct LossBreakdown {
  // Index 0: direct, 1: reverb, 2: direct + reverb.
  double snr_db[3] = {0, 0, 0};
  double si_snr_db[3] = {0, 0, 0};
  double bce = 0.0;
  double total = 0.0;
};

// sum over {direct, reverb, sum} of [w_snr * (-SNR) + w_si * (-SI-SNR)] + BCE,
// SNR terms channel-averaged. BCE is skipped when sed_pred is empty.
inline LossBreakdown combined_loss(const MultichannelWaveform& direct_est, const MultichannelWaveform& reverb_est,
                                   const MultichannelWaveform& direct_ref, const MultichannelWaveform& reverb_ref,
                                   std::span<const double> sed_pred = {}, std::span<const double> sed_target = {},
                                   const LossWeights& weights = {}) {
  require_same_shape(direct_est, direct_ref);
  require_same_shape(reverb_est, reverb_ref);
  require_same_shape(direct_est, reverb_est);
  MultichannelWaveform sum_est = direct_est, sum_ref = direct_ref;
  for (std::size_t i = 0; i < sum_est.data().size(); ++i) {
    sum_est.data()[i] += reverb_est.data()[i];
    sum_ref.data()[i] += reverb_ref.data()[i];
  }
  const MultichannelWaveform* ests[3] = {&direct_est, &reverb_est, &sum_est};
  const MultichannelWaveform* refs[3] = {&direct_ref, &reverb_ref, &sum_ref};
  LossBreakdown out;
  for (int k = 0; k < 3; ++k) {
    out.snr_db[k] = multichannel(&snr, *ests[k], *refs[k]);
    out.si_snr_db[k] = multichannel(&si_snr, *ests[k], *refs[k]);
    out.total += weights.snr * -out.snr_db[k] + weights.si_snr * -out.si_snr_db[k];
  }
  if (!sed_pred.empty() || !sed_target.empty()) {
    out.bce = bce_loss(sed_pred, sed_target);
    out.total += out.bce;
  }
  return out;
}

}  // namespace soundcompass::metrics
