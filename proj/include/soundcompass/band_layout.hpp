// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "soundcompass/error.hpp"
#include "soundcompass/tensor.hpp"

namespace soundcompass::spectral {

struct Band {
  std::size_t lo = 0;  // inclusive
  std::size_t hi = 0;  // inclusive
  std::size_t width() const { return hi - lo + 1; }
  bool contains(std::size_t f) const { return f >= lo && f <= hi; }
  bool operator==(const Band&) const = default;
};

struct BandLayout {
  std::vector<Band> bands;
  int sample_rate = 16000;
  std::size_t fft_size = 512;

  std::size_t size() const { return bands.size(); }
  std::size_t num_bins() const { return fft_size / 2 + 1; }
  bool operator==(const BandLayout&) const = default;
};

struct BandLayoutParams {
  double f_min = 50.0;
  double step_semitones = 3.0;
  double overlap_semitones = 1.0;
};

inline void validate_layout(const BandLayout& layout, std::size_t bins) {
  detail::require(!layout.bands.empty(), "band layout is empty");
  std::vector<bool> covered(bins, false);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto& b = layout.bands[k];
    detail::require(b.lo <= b.hi && b.hi < bins,
                    "band " + std::to_string(k) + " range [" + std::to_string(b.lo) + ", " +
                        std::to_string(b.hi) + "] invalid for " + std::to_string(bins) + " bins");
    for (std::size_t f = b.lo; f <= b.hi; ++f) covered[f] = true;
  }
  for (std::size_t f = 0; f < bins; ++f)
    detail::require(covered[f], "band layout leaves bin " + std::to_string(f) + " uncovered");
}

// Overlapping bands on a 12-TET grid: nominal edges at
// f_min * 2^(k * step / 12) below Nyquist, every band widened by half the
// overlap on each side, the first band extended to DC and the last to
// Nyquist. Bin widths are then made non-decreasing by growing narrower
// bands upward (downward once they reach the top bin).
inline BandLayout make_band_layout(std::size_t bins, int sample_rate,
                                   const BandLayoutParams& params = {}) {
  detail::require(bins >= 2, "band layout needs at least two bins");
  detail::require(sample_rate > 0, "sample_rate must be positive");
  detail::require(params.f_min > 0.0, "f_min must be positive");
  detail::require(params.overlap_semitones >= 0.0, "overlap must be non-negative");
  detail::require(params.step_semitones > params.overlap_semitones,
                  "step must exceed overlap");
  const double nyquist = sample_rate / 2.0;
  detail::require(params.f_min < nyquist, "f_min must be below Nyquist");

  const std::size_t fft_size = 2 * (bins - 1);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);

  std::vector<double> edges;
  for (int k = 0;; ++k) {
    const double e = params.f_min * std::pow(2.0, k * params.step_semitones / 12.0);
    if (e >= nyquist) break;
    edges.push_back(e);
  }
  const std::size_t count = edges.size() + 1;
  detail::require(count >= 2, "parameters yield fewer than two bands");

  const double widen = std::pow(2.0, params.overlap_semitones / 24.0);
  BandLayout layout;
  layout.sample_rate = sample_rate;
  layout.fft_size = fft_size;
  const auto last = static_cast<long>(bins - 1);
  for (std::size_t k = 0; k < count; ++k) {
    Band b;
    if (k == 0) {
      b.lo = 0;
    } else {
      const double lo_hz = edges[k - 1] / widen;
      b.lo = static_cast<std::size_t>(std::clamp(static_cast<long>(std::floor(lo_hz / bin_hz)), 0L, last));
    }
    if (k + 1 == count) {
      b.hi = bins - 1;
    } else {
      const double hi_hz = edges[k] * widen;
      b.hi = static_cast<std::size_t>(std::clamp(static_cast<long>(std::ceil(hi_hz / bin_hz)), 0L, last));
    }
    layout.bands.push_back(b);
  }

  for (std::size_t k = 1; k < count; ++k) {
    auto& b = layout.bands[k];
    const std::size_t prev = layout.bands[k - 1].width();
    if (b.width() >= prev) continue;
    std::size_t need = prev - b.width();
    const std::size_t up = std::min(need, bins - 1 - b.hi);
    b.hi += up;
    need -= up;
    b.lo -= std::min(need, b.lo);
  }
  validate_layout(layout, bins);
  return layout;
}

inline BandLayout default_band_layout(std::size_t bins = 257, int sample_rate = 16000) {
  return make_band_layout(bins, sample_rate, BandLayoutParams{});
}

// Single band spanning every bin.
inline BandLayout single_band_layout(std::size_t bins, int sample_rate = 16000) {
  BandLayout l;
  l.sample_rate = sample_rate;
  l.fft_size = 2 * (bins - 1);
  l.bands.push_back({0, bins - 1});
  return l;
}

// Band k is the slice of bins [lo_k, hi_k] of every (channel, frame) row.
inline std::vector<Tensor3> split_bands(const Tensor3& x, const BandLayout& layout) {
  validate_layout(layout, x.bins());
  std::vector<Tensor3> out;
  out.reserve(layout.size());
  for (const auto& b : layout.bands) {
    Tensor3 band(x.channels(), x.frames(), b.width());
    for (std::size_t c = 0; c < x.channels(); ++c)
      for (std::size_t t = 0; t < x.frames(); ++t) {
        const auto src = x.row(c, t);
        std::copy(src.begin() + static_cast<long>(b.lo), src.begin() + static_cast<long>(b.hi) + 1,
                  band.row(c, t).begin());
      }
    out.push_back(std::move(band));
  }
  return out;
}

// Cross-fade weights: each band ramps up linearly across its overlap with
// the previous band and down across its overlap with the next, then the
// weights of all bands covering a bin are normalised to sum to one.
// Result[k][i] is the weight of bin lo_k + i in band k.
inline std::vector<std::vector<double>> merge_weights(const BandLayout& layout, std::size_t bins) {
  validate_layout(layout, bins);
  const auto& bands = layout.bands;
  const std::size_t count = bands.size();
  std::vector<std::vector<double>> raw(count);
  std::vector<double> total(bins, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& b = bands[k];
    raw[k].assign(b.width(), 1.0);
    for (std::size_t f = b.lo; f <= b.hi; ++f) {
      double w = 1.0;
      if (k > 0 && bands[k - 1].hi >= b.lo && f <= bands[k - 1].hi)
        w *= static_cast<double>(f - b.lo + 1) / static_cast<double>(bands[k - 1].hi - b.lo + 2);
      if (k + 1 < count && bands[k + 1].lo <= b.hi && f >= bands[k + 1].lo)
        w *= static_cast<double>(b.hi - f + 1) / static_cast<double>(b.hi - bands[k + 1].lo + 2);
      raw[k][f - b.lo] = w;
      total[f] += w;
    }
  }
  std::vector<std::size_t> last(bins, 0);
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t f = bands[k].lo; f <= bands[k].hi; ++f) last[f] = k;
  // The highest covering band takes the complement of the running sum, so the
  // weights of a bin add to exactly 1 when summed in band order.
  std::vector<double> running(bins, 0.0);
  for (std::size_t k = 0; k < count; ++k)
    for (std::size_t i = 0; i < raw[k].size(); ++i) {
      const std::size_t f = bands[k].lo + i;
      raw[k][i] = last[f] == k ? 1.0 - running[f] : raw[k][i] / total[f];
      running[f] += raw[k][i];
    }
  return raw;
}

// Inverse of split_bands. Each bin is anchored on the lowest-index band that
// covers it and corrected by the weighted deviations of the others, so bands
// that agree on a bin reproduce it bit-exactly.
inline Tensor3 merge_bands(const std::vector<Tensor3>& bands, const BandLayout& layout) {
  detail::require(bands.size() == layout.size(), "band count does not match layout");
  detail::require(!bands.empty(), "no bands to merge");
  std::size_t bins = 0;
  for (const auto& b : layout.bands) bins = std::max(bins, b.hi + 1);
  const std::size_t channels = bands.front().channels();
  const std::size_t frames = bands.front().frames();
  for (std::size_t k = 0; k < bands.size(); ++k)
    detail::require(bands[k].channels() == channels && bands[k].frames() == frames &&
                        bands[k].bins() == layout.bands[k].width(),
                    "band " + std::to_string(k) + " shape does not match layout");
  const auto weights = merge_weights(layout, bins);

  std::vector<std::vector<std::size_t>> covering(bins);
  for (std::size_t k = 0; k < layout.size(); ++k)
    for (std::size_t f = layout.bands[k].lo; f <= layout.bands[k].hi; ++f) covering[f].push_back(k);

  Tensor3 out(channels, frames, bins);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t f = 0; f < bins; ++f) {
        const auto& ks = covering[f];
        const std::size_t k0 = ks.front();
        const double anchor = bands[k0](c, t, f - layout.bands[k0].lo);
        double acc = anchor;
        for (std::size_t i = 1; i < ks.size(); ++i) {
          const std::size_t k = ks[i];
          const std::size_t local = f - layout.bands[k].lo;
          acc += weights[k][local] * (bands[k](c, t, local) - anchor);
        }
        out(c, t, f) = acc;
      }
  return out;
}

inline nlohmann::json layout_to_json(const BandLayout& layout) {
  nlohmann::json j;
  j["fs"] = layout.sample_rate;
  j["fft_size"] = layout.fft_size;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : layout.bands) j["bands"].push_back({b.lo, b.hi});
  return j;
}

inline BandLayout layout_from_json(const nlohmann::json& j) {
  detail::require(j.is_object() && j.contains("fs") && j.contains("fft_size") && j.contains("bands"),
                  "band layout JSON needs fs, fft_size and bands");
  BandLayout l;
  try {
    l.sample_rate = j.at("fs").get<int>();
    l.fft_size = j.at("fft_size").get<std::size_t>();
    for (const auto& b : j.at("bands")) {
      detail::require(b.is_array() && b.size() == 2, "each band must be [lo, hi]");
      l.bands.push_back({b[0].get<std::size_t>(), b[1].get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed band layout: ") + e.what());
  }
  validate_layout(l, l.num_bins());
  return l;
}

inline BandLayout read_layout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return layout_from_json(j);
}

}  // namespace soundcompass::spectral
