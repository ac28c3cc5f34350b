// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "soundcompass/band_layout.hpp"
#include "soundcompass/fusion.hpp"

// Central finite-difference verification of the fusion gradients. Only the
// forward pass is used to form the numerical estimate.

namespace soundcompass::fusion {

struct GradCheckOptions {
  double step = 1e-4;
  std::size_t coords_per_group = 10;
  // Relative error is |a - n| / max(|a|, |n|, abs_floor). The floor sits
  // above the roundoff of a difference quotient on an O(1) objective.
  double abs_floor = 1e-3;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t coordinates = 0;
  std::size_t skipped_at_kink = 0;
};

inline double grad_rel_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double inner(const Tensor3& a, const Tensor3& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

namespace check_detail {

inline std::vector<bool> kink_signature(const BandResult& r) {
  std::vector<bool> sig;
  for (const auto& tr : r.feature_traces)
    for (double z : tr.pre_activation) sig.push_back(z >= 0.0);
  for (const auto& tr : r.film.clue_traces)
    for (double z : tr.pre_activation) sig.push_back(z >= 0.0);
  return sig;
}

}  // namespace check_detail

// Checks every parameter group of one band plus its feature and clue inputs
// against central differences of <upstream, fuse_band(x, clue, w)>.
inline GradCheckReport check_band_gradients(BandWeights w, Tensor3 x, ClueSequence clue,
                                            const Tensor3& upstream, std::mt19937_64& rng,
                                            const GradCheckOptions& opt = {}) {
  auto grad = band_gradients(x, clue, w, upstream);
  auto params = band_parameters(w, "band");
  auto grads = band_gradient_views(grad, "band");
  params.push_back({"input.feature", x.data()});
  grads.push_back({"input.feature", grad.input.data()});
  params.push_back({"input.clue", clue.values});
  grads.push_back({"input.clue", grad.film.clue});

  const auto base_sig = check_detail::kink_signature(band_forward(x, clue, w));
  GradCheckReport report;
  for (std::size_t g = 0; g < params.size(); ++g) {
    auto values = params[g].values;
    if (values.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    const std::size_t wanted = std::min(opt.coords_per_group, values.size());
    std::size_t done = 0;
    for (std::size_t attempt = 0; done < wanted && attempt < 20 * wanted; ++attempt) {
      const std::size_t i = pick(rng);
      const double saved = values[i];
      values[i] = saved + opt.step;
      const auto plus = band_forward(x, clue, w);
      values[i] = saved - opt.step;
      const auto minus = band_forward(x, clue, w);
      values[i] = saved;
      if (check_detail::kink_signature(plus) != base_sig || check_detail::kink_signature(minus) != base_sig) {
        ++report.skipped_at_kink;
        continue;
      }
      const double numeric = (inner(upstream, plus.output) - inner(upstream, minus.output)) / (2.0 * opt.step);
      const double err = grad_rel_error(grads[g].values[i], numeric, opt.abs_floor);
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_parameter = params[g].name + "[" + std::to_string(i) + "]";
      }
      ++report.coordinates;
      ++done;
    }
  }
  return report;
}

inline void fill_uniform(std::span<double> v, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& x : v) x = u(rng);
}

// Randomises every parameter, including AdaNorm gain/shift and the scalar
// k_ada and PReLU slope, so no group sits at a degenerate initial value.
inline void randomize(BandWeights& w, std::mt19937_64& rng) {
  for (auto& s : band_parameters(w, "band")) {
    if (s.name.ends_with(".k_ada")) {
      fill_uniform(s.values, rng, 0.0, 0.3);
    } else if (s.name.ends_with(".prelu_slope")) {
      fill_uniform(s.values, rng, 0.05, 0.5);
    } else if (s.name.ends_with(".gain")) {
      fill_uniform(s.values, rng, 0.5, 1.5);
    } else {
      fill_uniform(s.values, rng, -0.5, 0.5);
    }
  }
}

// Zeroes both FiLM heads, which makes gamma = beta = 0.
inline void null_modulation(FilmWeights& w) {
  std::fill(w.gamma_weight.begin(), w.gamma_weight.end(), 0.0);
  std::fill(w.gamma_bias.begin(), w.gamma_bias.end(), 0.0);
  std::fill(w.beta_weight.begin(), w.beta_weight.end(), 0.0);
  std::fill(w.beta_bias.begin(), w.beta_bias.end(), 0.0);
}

struct FuseCheckSummary {
  GradCheckReport gradients;
  bool null_modulation_exact = true;
  std::size_t bands = 0;
};

// Gradient check over `bands` randomised bands shaped like the default
// 31-band layout (64 SPIN channels, 72-dim clue), plus the null-modulation
// identity on each band. Odd bands use a time-varying clue.
inline FuseCheckSummary run_fuse_check(std::uint64_t seed, std::size_t bands, std::size_t frames = 3,
                                       const GradCheckOptions& opt = {}) {
  detail::require(bands >= 1, "need at least one band");
  detail::require(frames >= 1, "need at least one frame");
  constexpr std::size_t kInChannels = 64;
  constexpr std::size_t kClueDim = 72;
  const auto layout = spectral::default_band_layout();
  std::mt19937_64 rng(seed);
  auto weights = init_fusion_weights(bands, kInChannels, kClueDim, rng());
  FuseCheckSummary out;
  out.bands = bands;
  for (std::size_t k = 0; k < bands; ++k) {
    auto& w = weights.bands[k];
    randomize(w, rng);
    const std::size_t width = layout.bands[k % layout.size()].width();
    Tensor3 x(kInChannels, frames, width);
    fill_uniform(x.data(), rng);
    ClueSequence clue{{}, k % 2 ? frames : 1, kClueDim};
    clue.values.resize(clue.rows * kClueDim);
    fill_uniform(clue.values, rng);
    Tensor3 upstream(w.film.channels, frames, width);
    fill_uniform(upstream.data(), rng);

    const auto r = check_band_gradients(w, x, clue, upstream, rng, opt);
    out.gradients.coordinates += r.coordinates;
    out.gradients.skipped_at_kink += r.skipped_at_kink;
    if (r.max_rel_error >= out.gradients.max_rel_error) {
      out.gradients.max_rel_error = r.max_rel_error;
      out.gradients.worst_parameter = band_prefix(k) + "/" + r.worst_parameter;
    }

    BandWeights nulled = w;
    null_modulation(nulled.film);
    const auto fwd = band_forward(x, clue, nulled);
    if (!(fwd.output == fwd.encoded)) out.null_modulation_exact = false;
  }
  return out;
}

}  // namespace soundcompass::fusion
