// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "soundcompass/band_layout.hpp"
#include "soundcompass/clue.hpp"
#include "soundcompass/error.hpp"
#include "soundcompass/spin.hpp"
#include "soundcompass/tensor.hpp"

// Per-subband FiLM conditioning of spatial features on a direction clue.
// Forward passes keep a trace so that reverse-mode gradients can be taken
// without recomputation.

namespace soundcompass::fusion {

inline constexpr double kDefaultAdaK = 0.1;
inline constexpr double kLayerNormEps = 1e-5;
inline constexpr std::size_t kDefaultHidden = 64;
inline constexpr std::size_t kDefaultBandChannels = 16;

// Linear -> AdaNorm -> PReLU.
//   a = W x + b
//   y = (a - mean(a)) / sqrt(var(a) + eps)
//   z = gain * (1 - k_ada * y) * y + shift
//   out = z >= 0 ? z : prelu_slope * z
struct EncodingBlock {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weight;  // [out_dim x in_dim]
  std::vector<double> bias;    // [out_dim]
  std::vector<double> gain;    // [out_dim]
  std::vector<double> shift;   // [out_dim]
  double k_ada = kDefaultAdaK;
  double prelu_slope = 0.25;
};

struct EncodingTrace {
  std::vector<double> input;
  std::vector<double> standardized;    // y
  std::vector<double> pre_activation;  // z
  std::vector<double> output;
  double inv_std = 0.0;
};

struct EncodingGrad {
  std::vector<double> weight, bias, gain, shift;
  double k_ada = 0.0;
  double prelu_slope = 0.0;
  std::vector<double> input;

  explicit EncodingGrad(const EncodingBlock& b = {})
      : weight(b.weight.size(), 0.0), bias(b.out_dim, 0.0), gain(b.out_dim, 0.0),
        shift(b.out_dim, 0.0), input(b.in_dim, 0.0) {}
};

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline void validate(const EncodingBlock& b) {
  detail::require(b.in_dim > 0 && b.out_dim > 0, "encoding block has an empty dimension");
  detail::require(b.weight.size() == b.in_dim * b.out_dim && b.bias.size() == b.out_dim &&
                      b.gain.size() == b.out_dim && b.shift.size() == b.out_dim,
                  "encoding block parameter shapes are inconsistent");
  detail::require(all_finite(b.weight) && all_finite(b.bias) && all_finite(b.gain) &&
                      all_finite(b.shift) && std::isfinite(b.k_ada) && std::isfinite(b.prelu_slope),
                  "encoding block has non-finite weights");
}

inline EncodingTrace encoding_forward(const EncodingBlock& b, std::span<const double> x) {
  detail::require(x.size() == b.in_dim, "encoding block input has size " + std::to_string(x.size()) +
                                            ", expected " + std::to_string(b.in_dim));
  detail::require(all_finite(x), "encoding block input is not finite");
  const std::size_t h = b.out_dim;
  EncodingTrace tr;
  tr.input.assign(x.begin(), x.end());
  std::vector<double> a(h);
  for (std::size_t i = 0; i < h; ++i) {
    double s = b.bias[i];
    const double* row = b.weight.data() + i * b.in_dim;
    for (std::size_t j = 0; j < b.in_dim; ++j) s += row[j] * x[j];
    a[i] = s;
  }
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(h);
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  var /= static_cast<double>(h);
  tr.inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
  tr.standardized.resize(h);
  tr.pre_activation.resize(h);
  tr.output.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    const double y = (a[i] - mean) * tr.inv_std;
    const double z = b.gain[i] * (1.0 - b.k_ada * y) * y + b.shift[i];
    tr.standardized[i] = y;
    tr.pre_activation[i] = z;
    tr.output[i] = z >= 0.0 ? z : b.prelu_slope * z;
  }
  return tr;
}

inline std::vector<double> encoding_block(const EncodingBlock& b, std::span<const double> x) {
  return encoding_forward(b, x).output;
}

// Accumulates parameter gradients into g and overwrites g.input.
inline void encoding_backward(const EncodingBlock& b, const EncodingTrace& tr,
                              std::span<const double> dout, EncodingGrad& g) {
  const std::size_t h = b.out_dim;
  std::vector<double> dy(h);
  double mean_dy = 0.0, mean_dy_y = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    const double z = tr.pre_activation[i];
    double dz = dout[i];
    if (z < 0.0) {
      g.prelu_slope += dout[i] * z;
      dz *= b.prelu_slope;
    }
    const double y = tr.standardized[i];
    g.gain[i] += dz * (1.0 - b.k_ada * y) * y;
    g.shift[i] += dz;
    const double dn = dz * b.gain[i];
    g.k_ada += -dn * y * y;
    dy[i] = dn * (1.0 - 2.0 * b.k_ada * y);
    mean_dy += dy[i];
    mean_dy_y += dy[i] * y;
  }
  mean_dy /= static_cast<double>(h);
  mean_dy_y /= static_cast<double>(h);
  std::fill(g.input.begin(), g.input.end(), 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const double da = tr.inv_std * (dy[i] - mean_dy - tr.standardized[i] * mean_dy_y);
    g.bias[i] += da;
    double* grow = g.weight.data() + i * b.in_dim;
    const double* wrow = b.weight.data() + i * b.in_dim;
    for (std::size_t j = 0; j < b.in_dim; ++j) {
      grow[j] += da * tr.input[j];
      g.input[j] += da * wrow[j];
    }
  }
}

// Clue encoder plus the linear heads producing gamma and beta for C channels.
struct FilmWeights {
  EncodingBlock clue_encoder;  // clue_dim -> hidden
  std::size_t channels = 0;
  std::vector<double> gamma_weight;  // [channels x hidden]
  std::vector<double> gamma_bias;    // [channels]
  std::vector<double> beta_weight;   // [channels x hidden]
  std::vector<double> beta_bias;     // [channels]
};

struct BandWeights {
  EncodingBlock feature_encoder;  // in_channels -> channels, applied per (t, f)
  FilmWeights film;
};

struct FusionWeights {
  std::size_t in_channels = 0;
  std::size_t clue_dim = 0;
  std::size_t hidden = 0;
  std::vector<BandWeights> bands;
};

inline void validate(const FilmWeights& w) {
  validate(w.clue_encoder);
  const std::size_t hdim = w.clue_encoder.out_dim;
  detail::require(w.channels > 0, "FiLM needs at least one channel");
  detail::require(w.gamma_weight.size() == w.channels * hdim && w.beta_weight.size() == w.channels * hdim &&
                      w.gamma_bias.size() == w.channels && w.beta_bias.size() == w.channels,
                  "FiLM head shapes are inconsistent");
  detail::require(all_finite(w.gamma_weight) && all_finite(w.gamma_bias) && all_finite(w.beta_weight) &&
                      all_finite(w.beta_bias),
                  "FiLM heads have non-finite weights");
}

// One clue vector per frame, or a single row broadcast over all frames.
struct ClueSequence {
  std::vector<double> values;  // [rows x dim]
  std::size_t rows = 0;
  std::size_t dim = 0;

  static ClueSequence from_static(const clue::ClueEmbedding& e) { return {e.vector, 1, e.dim()}; }
  static ClueSequence from_time_varying(const clue::TimeVaryingClue& c) {
    return {c.matrix, c.frames, c.dim};
  }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * dim, dim}; }
  std::span<double> row(std::size_t r) { return {values.data() + r * dim, dim}; }
};

struct FilmTrace {
  std::vector<EncodingTrace> clue_traces;  // one per clue row
  std::vector<double> gamma;               // [rows x channels]
  std::vector<double> beta;                // [rows x channels]
  std::size_t rows = 0;
};

struct FilmResult {
  Tensor3 output;
  FilmTrace trace;
};

inline void apply_affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
                   std::span<double> out) {
  const std::size_t n = x.size();
  for (std::size_t c = 0; c < out.size(); ++c) {
    double s = b[c];
    for (std::size_t j = 0; j < n; ++j) s += w[c * n + j] * x[j];
    out[c] = s;
  }
}

// gamma, beta = heads(encoder(clue_t)); out = x + gamma * x + beta with
// gamma and beta indexed by (channel, frame) and broadcast over bins.
inline FilmResult film_forward(const Tensor3& feat, const ClueSequence& clue, const FilmWeights& w) {
  validate(w);
  detail::require(feat.channels() == w.channels,
                                "feature has " + std::to_string(feat.channels()) + " channels, FiLM expects " +
                                    std::to_string(w.channels));
  detail::require(clue.dim == w.clue_encoder.in_dim,
                                "clue dimension " + std::to_string(clue.dim) + " does not match encoder input " +
                                    std::to_string(w.clue_encoder.in_dim));
  detail::require(clue.rows == 1 || clue.rows == feat.frames(),
                                "time-varying clue has " + std::to_string(clue.rows) + " rows for " +
                                    std::to_string(feat.frames()) + " frames");
  const std::size_t channels = w.channels;
  FilmResult r{Tensor3(feat.channels(), feat.frames(), feat.bins()), {}};
  auto& tr = r.trace;
  tr.rows = clue.rows;
  tr.gamma.resize(clue.rows * channels);
  tr.beta.resize(clue.rows * channels);
  for (std::size_t row = 0; row < clue.rows; ++row) {
    tr.clue_traces.push_back(encoding_forward(w.clue_encoder, clue.row(row)));
    const auto& h = tr.clue_traces.back().output;
    apply_affine(w.gamma_weight, w.gamma_bias, h, {tr.gamma.data() + row * channels, channels});
    apply_affine(w.beta_weight, w.beta_bias, h, {tr.beta.data() + row * channels, channels});
  }
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < feat.frames(); ++t) {
      const std::size_t row = clue.rows == 1 ? 0 : t;
      const double g = tr.gamma[row * channels + c];
      const double b = tr.beta[row * channels + c];
      const auto x = feat.row(c, t);
      auto y = r.output.row(c, t);
      for (std::size_t f = 0; f < x.size(); ++f) y[f] = x[f] + (g * x[f] + b);
    }
  return r;
}

inline Tensor3 film_fuse(const Tensor3& feat, const ClueSequence& clue, const FilmWeights& w) {
  return film_forward(feat, clue, w).output;
}

struct FilmGrad {
  EncodingGrad clue_encoder;
  std::vector<double> gamma_weight, gamma_bias, beta_weight, beta_bias;
  Tensor3 feat;
  std::vector<double> clue;  // same layout as ClueSequence::values
};

// Reverse-mode gradients of <upstream, film_fuse(feat, clue, w)>.
inline FilmGrad film_gradients(const Tensor3& feat, const ClueSequence& clue, const FilmWeights& w,
                               const Tensor3& upstream) {
  detail::require(upstream.same_shape(feat), "upstream gradient shape does not match feature");
  const auto fwd = film_forward(feat, clue, w);
  const auto& tr = fwd.trace;
  const std::size_t channels = w.channels;
  const std::size_t hdim = w.clue_encoder.out_dim;

  FilmGrad g{EncodingGrad(w.clue_encoder),
             std::vector<double>(w.gamma_weight.size(), 0.0),
             std::vector<double>(channels, 0.0),
             std::vector<double>(w.beta_weight.size(), 0.0),
             std::vector<double>(channels, 0.0),
             Tensor3(feat.channels(), feat.frames(), feat.bins()),
             std::vector<double>(clue.values.size(), 0.0)};

  std::vector<double> dgamma(tr.rows * channels, 0.0), dbeta(tr.rows * channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < feat.frames(); ++t) {
      const std::size_t row = tr.rows == 1 ? 0 : t;
      const double gam = tr.gamma[row * channels + c];
      const auto x = feat.row(c, t);
      const auto up = upstream.row(c, t);
      auto dx = g.feat.row(c, t);
      double sg = 0.0, sb = 0.0;
      for (std::size_t f = 0; f < x.size(); ++f) {
        sg += x[f] * up[f];
        sb += up[f];
        dx[f] = up[f] * (1.0 + gam);
      }
      dgamma[row * channels + c] += sg;
      dbeta[row * channels + c] += sb;
    }

  std::vector<double> dh(hdim);
  for (std::size_t row = 0; row < tr.rows; ++row) {
    const auto& h = tr.clue_traces[row].output;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
      const double dg = dgamma[row * channels + c];
      const double db = dbeta[row * channels + c];
      g.gamma_bias[c] += dg;
      g.beta_bias[c] += db;
      for (std::size_t j = 0; j < hdim; ++j) {
        g.gamma_weight[c * hdim + j] += dg * h[j];
        g.beta_weight[c * hdim + j] += db * h[j];
        dh[j] += dg * w.gamma_weight[c * hdim + j] + db * w.beta_weight[c * hdim + j];
      }
    }
    encoding_backward(w.clue_encoder, tr.clue_traces[row], dh, g.clue_encoder);
    std::copy(g.clue_encoder.input.begin(), g.clue_encoder.input.end(),
              g.clue.begin() + static_cast<long>(row * clue.dim));
  }
  return g;
}

// Feature encoder over the channel vector of every (t, f) bin, then FiLM.
struct BandResult {
  Tensor3 output;
  Tensor3 encoded;
  std::vector<EncodingTrace> feature_traces;  // (t, f) row-major
  FilmTrace film;
};

inline BandResult band_forward(const Tensor3& x, const ClueSequence& clue, const BandWeights& w) {
  validate(w.feature_encoder);
  detail::require(x.channels() == w.feature_encoder.in_dim,
                                "band input has " + std::to_string(x.channels()) + " channels, encoder expects " +
                                    std::to_string(w.feature_encoder.in_dim));
  detail::require(w.feature_encoder.out_dim == w.film.channels,
                                "feature encoder width does not match FiLM channels");
  BandResult r;
  r.encoded = Tensor3(w.film.channels, x.frames(), x.bins());
  r.feature_traces.reserve(x.frames() * x.bins());
  std::vector<double> v(x.channels());
  for (std::size_t t = 0; t < x.frames(); ++t)
    for (std::size_t f = 0; f < x.bins(); ++f) {
      for (std::size_t c = 0; c < x.channels(); ++c) v[c] = x(c, t, f);
      r.feature_traces.push_back(encoding_forward(w.feature_encoder, v));
      const auto& o = r.feature_traces.back().output;
      for (std::size_t c = 0; c < o.size(); ++c) r.encoded(c, t, f) = o[c];
    }
  auto film = film_forward(r.encoded, clue, w.film);
  r.output = std::move(film.output);
  r.film = std::move(film.trace);
  return r;
}

inline Tensor3 fuse_band(const Tensor3& x, const ClueSequence& clue, const BandWeights& w) {
  return band_forward(x, clue, w).output;
}

struct BandGrad {
  EncodingGrad feature_encoder;
  FilmGrad film;
  Tensor3 input;
};

inline BandGrad band_gradients(const Tensor3& x, const ClueSequence& clue, const BandWeights& w,
                               const Tensor3& upstream) {
  const auto fwd = band_forward(x, clue, w);
  BandGrad g{EncodingGrad(w.feature_encoder), film_gradients(fwd.encoded, clue, w.film, upstream),
             Tensor3(x.channels(), x.frames(), x.bins())};
  std::vector<double> dout(w.film.channels);
  std::size_t idx = 0;
  for (std::size_t t = 0; t < x.frames(); ++t)
    for (std::size_t f = 0; f < x.bins(); ++f, ++idx) {
      for (std::size_t c = 0; c < dout.size(); ++c) dout[c] = g.film.feat(c, t, f);
      encoding_backward(w.feature_encoder, fwd.feature_traces[idx], dout, g.feature_encoder);
      for (std::size_t c = 0; c < x.channels(); ++c) g.input(c, t, f) = g.feature_encoder.input[c];
    }
  return g;
}

struct FusedFeature {
  std::vector<Tensor3> bands;  // [C_k x T x F_k] per subband
};

inline FusedFeature fuse_all_bands(const spin::SpinFeature& feat, const spectral::BandLayout& layout,
                                   const ClueSequence& clue, const FusionWeights& w) {
  detail::require(w.bands.size() == layout.size(),
                                "weights cover " + std::to_string(w.bands.size()) + " bands, layout has " +
                                    std::to_string(layout.size()));
  const auto split = spectral::split_bands(feat.values, layout);
  FusedFeature out;
  out.bands.reserve(split.size());
  for (std::size_t k = 0; k < split.size(); ++k) {
    try {
      out.bands.push_back(fuse_band(split[k], clue, w.bands[k]));
    } catch (const InvalidInput& e) {
      throw InvalidInput("band " + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

// Named views of every trainable tensor, in a fixed order shared with the
// gradient views below. Scalars appear as length-1 spans.
struct NamedSpan {
  std::string name;
  std::span<double> values;
};

inline void append_block(std::vector<NamedSpan>& out, const std::string& prefix, EncodingBlock& b) {
  out.push_back({prefix + ".weight", b.weight});
  out.push_back({prefix + ".bias", b.bias});
  out.push_back({prefix + ".gain", b.gain});
  out.push_back({prefix + ".shift", b.shift});
  out.push_back({prefix + ".k_ada", {&b.k_ada, 1}});
  out.push_back({prefix + ".prelu_slope", {&b.prelu_slope, 1}});
}

inline void append_block_grad(std::vector<NamedSpan>& out, const std::string& prefix, EncodingGrad& g) {
  out.push_back({prefix + ".weight", g.weight});
  out.push_back({prefix + ".bias", g.bias});
  out.push_back({prefix + ".gain", g.gain});
  out.push_back({prefix + ".shift", g.shift});
  out.push_back({prefix + ".k_ada", {&g.k_ada, 1}});
  out.push_back({prefix + ".prelu_slope", {&g.prelu_slope, 1}});
}

inline std::vector<NamedSpan> film_parameters(FilmWeights& w, const std::string& prefix = "film") {
  std::vector<NamedSpan> out;
  append_block(out, prefix + ".clue", w.clue_encoder);
  out.push_back({prefix + ".gamma.weight", w.gamma_weight});
  out.push_back({prefix + ".gamma.bias", w.gamma_bias});
  out.push_back({prefix + ".beta.weight", w.beta_weight});
  out.push_back({prefix + ".beta.bias", w.beta_bias});
  return out;
}

inline std::vector<NamedSpan> film_gradient_views(FilmGrad& g, const std::string& prefix = "film") {
  std::vector<NamedSpan> out;
  append_block_grad(out, prefix + ".clue", g.clue_encoder);
  out.push_back({prefix + ".gamma.weight", g.gamma_weight});
  out.push_back({prefix + ".gamma.bias", g.gamma_bias});
  out.push_back({prefix + ".beta.weight", g.beta_weight});
  out.push_back({prefix + ".beta.bias", g.beta_bias});
  return out;
}

inline std::vector<NamedSpan> band_parameters(BandWeights& w, const std::string& prefix) {
  std::vector<NamedSpan> out;
  append_block(out, prefix + ".feature", w.feature_encoder);
  auto film = film_parameters(w.film, prefix);
  out.insert(out.end(), film.begin(), film.end());
  return out;
}

inline std::vector<NamedSpan> band_gradient_views(BandGrad& g, const std::string& prefix) {
  std::vector<NamedSpan> out;
  append_block_grad(out, prefix + ".feature", g.feature_encoder);
  auto film = film_gradient_views(g.film, prefix);
  out.insert(out.end(), film.begin(), film.end());
  return out;
}

inline std::string band_prefix(std::size_t k) { return "band" + std::to_string(k); }

inline std::vector<NamedSpan> fusion_parameters(FusionWeights& w) {
  std::vector<NamedSpan> out;
  for (std::size_t k = 0; k < w.bands.size(); ++k) {
    auto b = band_parameters(w.bands[k], band_prefix(k));
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for linear maps; AdaNorm gain 1,
// shift 0; PReLU slope 0.25.
inline EncodingBlock init_block(std::size_t in_dim, std::size_t out_dim, std::mt19937_64& rng) {
  EncodingBlock b;
  b.in_dim = in_dim;
  b.out_dim = out_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  b.weight.resize(in_dim * out_dim);
  for (double& v : b.weight) v = u(rng);
  b.bias.resize(out_dim);
  for (double& v : b.bias) v = u(rng);
  b.gain.assign(out_dim, 1.0);
  b.shift.assign(out_dim, 0.0);
  return b;
}

inline FilmWeights init_film(std::size_t clue_dim, std::size_t hidden, std::size_t channels,
                             std::mt19937_64& rng) {
  FilmWeights w;
  w.clue_encoder = init_block(clue_dim, hidden, rng);
  w.channels = channels;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto fill = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& x : v) x = u(rng);
  };
  fill(w.gamma_weight, channels * hidden);
  fill(w.gamma_bias, channels);
  fill(w.beta_weight, channels * hidden);
  fill(w.beta_bias, channels);
  return w;
}

inline FusionWeights init_fusion_weights(std::size_t bands, std::size_t in_channels, std::size_t clue_dim,
                                         std::uint64_t seed, std::size_t hidden = kDefaultHidden,
                                         std::size_t band_channels = kDefaultBandChannels) {
  FusionWeights w{in_channels, clue_dim, hidden, {}};
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < bands; ++k) {
    BandWeights b;
    b.feature_encoder = init_block(in_channels, band_channels, rng);
    b.film = init_film(clue_dim, hidden, band_channels, rng);
    w.bands.push_back(std::move(b));
  }
  return w;
}

}  // namespace soundcompass::fusion
