// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundcompass/error.hpp"

namespace soundcompass::clue {

// Direction of arrival. polar is measured from +z in [0, pi]; azimuth is
// counter-clockwise from +x, wrapped into [0, 2 pi).
class DoAClue {
 public:
  DoAClue() = default;
  DoAClue(double polar, double azimuth) : polar_(polar), azimuth_(wrap_azimuth(azimuth)) {
    detail::require(std::isfinite(polar) && std::isfinite(azimuth), "DoA angles must be finite");
    detail::require(polar >= 0.0 && polar <= std::numbers::pi, "polar angle must lie in [0, pi]");
  }

  // Elevation above the horizontal plane, in [-pi/2, pi/2].
  static DoAClue from_elevation(double elevation, double azimuth) {
    return DoAClue(std::numbers::pi / 2.0 - elevation, azimuth);
  }

  static DoAClue from_degrees(double elevation_deg, double azimuth_deg) {
    const double az = std::fmod(azimuth_deg, 360.0);
    return from_elevation(elevation_deg * std::numbers::pi / 180.0,
                          (az < 0.0 ? az + 360.0 : az) * std::numbers::pi / 180.0);
  }

  double polar() const { return polar_; }
  double azimuth() const { return azimuth_; }
  double elevation() const { return std::numbers::pi / 2.0 - polar_; }

  std::array<double, 3> unit_vector() const {
    return {std::sin(polar_) * std::cos(azimuth_), std::sin(polar_) * std::sin(azimuth_),
            std::cos(polar_)};
  }

  static double wrap_azimuth(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
  }

 private:
  double polar_ = 0.0;
  double azimuth_ = 0.0;
};

// Great-circle distance between two directions, radians.
inline double angular_distance(const DoAClue& a, const DoAClue& b) {
  const auto u = a.unit_vector();
  const auto v = b.unit_vector();
  const double c = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// P_n^m(x) including the Condon-Shortley phase (-1)^m, 0 <= m <= n.
// Upward recurrence in n from the closed-form P_m^m.
inline double assoc_legendre(int n, int m, double x) {
  detail::require(m >= 0 && m <= n, "assoc_legendre requires 0 <= m <= n");
  detail::require(std::abs(x) <= 1.0, "assoc_legendre requires |x| <= 1");
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt((1.0 - x) * (1.0 + x));
    double odd = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -odd * s;
      odd += 2.0;
    }
  }
  if (n == m) return pmm;
  double pmm1 = x * (2.0 * m + 1.0) * pmm;
  if (n == m + 1) return pmm1;
  double pnm = 0.0;
  for (int l = m + 2; l <= n; ++l) {
    pnm = ((2.0 * l - 1.0) * x * pmm1 - (l + m - 1.0) * pmm) / (l - m);
    pmm = pmm1;
    pmm1 = pnm;
  }
  return pnm;
}

// Y_n^m(theta, phi) = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m(cos theta) e^{i m phi},
// with Y_n^{-m} = (-1)^m conj(Y_n^m).
inline std::complex<double> sh_complex(int n, int m, double polar, double azimuth) {
  detail::require(n >= 0, "spherical harmonic order must be non-negative");
  detail::require(std::abs(m) <= n, "spherical harmonic degree must satisfy |m| <= n");
  if (m < 0) {
    const auto y = sh_complex(n, -m, polar, azimuth);
    return ((-m) % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
  }
  double ratio = 1.0;  // (n-m)! / (n+m)!
  for (int k = n - m + 1; k <= n + m; ++k) ratio /= static_cast<double>(k);
  const double norm = std::sqrt((2.0 * n + 1.0) / (4.0 * std::numbers::pi) * ratio);
  const double p = assoc_legendre(n, m, std::cos(polar));
  return norm * p * std::polar(1.0, m * azimuth);
}

enum class EmbeddingKind { kSh, kCycPos };

inline std::string to_string(EmbeddingKind k) { return k == EmbeddingKind::kSh ? "sh" : "cyc_pos"; }

struct ClueEmbedding {
  std::vector<double> vector;
  int order = 0;
  EmbeddingKind kind = EmbeddingKind::kSh;

  std::size_t dim() const { return vector.size(); }
};

inline std::size_t sh_embedding_dim(int order) {
  return 2 * static_cast<std::size_t>(order + 1) * static_cast<std::size_t>(order + 1);
}

// [Re Y_n^m ..., Im Y_n^m ...] with (n, m) ordered n = 0..N, m = -n..n.
inline ClueEmbedding encode_sh(const DoAClue& d, int order) {
  detail::require(order >= 0, "SH order must be non-negative");
  const std::size_t half = sh_embedding_dim(order) / 2;
  ClueEmbedding e{std::vector<double>(2 * half), order, EmbeddingKind::kSh};
  std::size_t idx = 0;
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m, ++idx) {
      const auto y = sh_complex(n, m, d.polar(), d.azimuth());
      e.vector[idx] = y.real();
      e.vector[half + idx] = y.imag();
    }
  return e;
}

// [sin(2^k phi), cos(2^k phi)]_k followed by [sin(2^k theta), cos(2^k theta)]_k,
// k = 0..dim/4-1.
inline ClueEmbedding encode_cyc_pos(const DoAClue& d, std::size_t dim) {
  detail::require(dim > 0 && dim % 4 == 0, "cyc-pos dimension must be a positive multiple of 4");
  const std::size_t per_angle = dim / 4;
  ClueEmbedding e{std::vector<double>(dim), 0, EmbeddingKind::kCycPos};
  const double angles[2] = {d.azimuth(), d.polar()};
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t k = 0; k < per_angle; ++k) {
      const double x = std::ldexp(angles[a], static_cast<int>(k));
      e.vector[a * dim / 2 + 2 * k] = std::sin(x);
      e.vector[a * dim / 2 + 2 * k + 1] = std::cos(x);
    }
  return e;
}

// Row t is activation(t) * embedding; every row is a non-negative scaling of
// the static vector.
struct TimeVaryingClue {
  std::vector<double> matrix;  // [frames x dim], row-major
  std::vector<double> scale;   // per-frame factor applied to the embedding
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::size_t activation_source_len = 0;

  std::span<const double> row(std::size_t t) const { return {matrix.data() + t * dim, dim}; }
};

// Linear interpolation of activation (length T') onto T frames with both
// endpoints aligned, then scaling of the static embedding.
inline std::vector<double> interpolate_activation(std::span<const double> activation, std::size_t frames) {
  detail::require(!activation.empty(), "activation must have at least one frame");
  detail::require(frames >= 1, "target frame count must be positive");
  std::vector<double> out(frames);
  const std::size_t src = activation.size();
  for (std::size_t t = 0; t < frames; ++t) {
    if (src == 1 || frames == 1) {
      out[t] = activation[0];
      continue;
    }
    const double pos = static_cast<double>(t) * static_cast<double>(src - 1) / static_cast<double>(frames - 1);
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 + 1 >= src) {
      out[t] = activation[src - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out[t] = activation[i0] + frac * (activation[i0 + 1] - activation[i0]);
  }
  return out;
}

inline TimeVaryingClue build_time_varying_clue(const ClueEmbedding& emb, std::span<const double> activation,
                                               std::size_t frames) {
  for (double a : activation)
    detail::require(a >= 0.0 && a <= 1.0, "activation values must lie in [0, 1]");
  TimeVaryingClue out;
  out.scale = interpolate_activation(activation, frames);
  out.frames = frames;
  out.dim = emb.dim();
  out.activation_source_len = activation.size();
  out.matrix.resize(frames * out.dim);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t d = 0; d < out.dim; ++d) out.matrix[t * out.dim + d] = out.scale[t] * emb.vector[d];
  return out;
}

inline nlohmann::json embedding_to_json(const ClueEmbedding& e) {
  return {{"kind", to_string(e.kind)}, {"order", e.order}, {"vector", e.vector}};
}

inline nlohmann::json time_varying_to_json(const ClueEmbedding& e, const TimeVaryingClue& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < c.frames; ++t) {
    const auto r = c.row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"kind", to_string(e.kind)},
          {"order", e.order},
          {"frames", c.frames},
          {"activation_source_len", c.activation_source_len},
          {"matrix", rows}};
}

}  // namespace soundcompass::clue
