// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "soundcompass/audio_io.hpp"
#include "soundcompass/clue.hpp"
#include "soundcompass/dsp.hpp"
#include "soundcompass/error.hpp"
#include "soundcompass/fft.hpp"
#include "soundcompass/scene.hpp"
#include "soundcompass/spectral.hpp"
#include "soundcompass/waveform.hpp"

// Shoebox image-source simulation (Allen & Berkley) and scene rendering with
// separate direct-path and reverberant stems.

namespace soundcompass::roomsim {

inline constexpr int kMaxImageOrder = 12;
inline constexpr double kActivationGateDb = -40.0;

struct RoomImpulseResponse {
  MultichannelWaveform taps;            // [M x L]
  std::vector<long> direct_tap_index;   // per mic, round(d / c * fs)
  std::vector<double> direct_delay;     // per mic, exact d / c * fs in samples
  int sample_rate = 16000;
};

// The order-0 image and everything else, rendered separately.
struct RirParts {
  RoomImpulseResponse direct;
  RoomImpulseResponse reverb;
  int image_order = 0;
};

struct RirOptions {
  std::optional<int> max_order;  // per-axis image index bound
};

// Reverberation time implied by the wall absorption (Sabine), used only to
// size the image set.
inline double sabine_rt60(const Vec3& dims, const WallAbsorption& a) {
  const double sx = dims[1] * dims[2], sy = dims[0] * dims[2], sz = dims[0] * dims[1];
  const double absorbing = (a[0] + a[1]) * sx + (a[2] + a[3]) * sy + (a[4] + a[5]) * sz;
  if (absorbing <= 0.0) return std::numeric_limits<double>::infinity();
  return 24.0 * std::numbers::ln10 * room_volume(dims) / (dsp::kSpeedOfSound * absorbing);
}

// ceil(RT60 c / min dim) + 1, capped at kMaxImageOrder; 0 for anechoic rooms.
inline int image_order_for(const SceneSpec& s) {
  const auto a = wall_absorption(s);
  if (std::all_of(a.begin(), a.end(), [](double v) { return v >= 1.0; })) return 0;
  const double rt60 = sabine_rt60(s.room_dims, a);
  if (!std::isfinite(rt60)) return kMaxImageOrder;
  const double min_dim = *std::min_element(s.room_dims.begin(), s.room_dims.end());
  const double order = std::ceil(rt60 * dsp::kSpeedOfSound / min_dim) + 1.0;
  return static_cast<int>(std::min<double>(order, kMaxImageOrder));
}

inline RirParts simulate_rir_parts(const SceneSpec& s, std::size_t source_index, const RirOptions& opt = {}) {
  detail::require(source_index < s.sources.size(), "source index out of range");
  const auto absorption = wall_absorption(s);
  std::array<double, 6> beta{};
  for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(std::max(0.0, 1.0 - absorption[i]));
  const int order = opt.max_order.value_or(image_order_for(s));
  detail::require(order >= 0, "image order must be non-negative");

  const Vec3& src = s.sources[source_index].position;
  const Vec3& dims = s.room_dims;
  const double fs = static_cast<double>(s.sample_rate);
  const double samples_per_metre = fs / dsp::kSpeedOfSound;
  const std::size_t mics = s.num_mics();

  for (std::size_t m = 0; m < mics; ++m)
    detail::require(norm(src - s.mic_position(m)) >= 1e-3,
                    "source " + std::to_string(source_index) + " coincides with microphone " + std::to_string(m));

  // Longest image path bounds the RIR length.
  double max_dist = 0.0;
  for (std::size_t m = 0; m < mics; ++m) {
    const Vec3 r = s.mic_position(m);
    double sq = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      const double reach = 2.0 * order * dims[ax] + std::max(src[ax], dims[ax] - src[ax]) +
                           std::max(r[ax], dims[ax] - r[ax]);
      sq += reach * reach;
    }
    max_dist = std::max(max_dist, std::sqrt(sq));
  }
  const auto length = static_cast<std::size_t>(std::ceil(max_dist * samples_per_metre + dsp::kSincHalfWidth)) + 1;

  RirParts parts;
  parts.image_order = order;
  for (auto* r : {&parts.direct, &parts.reverb}) {
    r->taps = MultichannelWaveform(mics, length, s.sample_rate);
    r->sample_rate = s.sample_rate;
  }

  for (std::size_t m = 0; m < mics; ++m) {
    const Vec3 r = s.mic_position(m);
    const double d0 = norm(src - r);
    parts.direct.direct_delay.push_back(d0 * samples_per_metre);
    parts.direct.direct_tap_index.push_back(std::lround(d0 * samples_per_metre));
    auto direct = parts.direct.taps.channel(m);
    auto reverb = parts.reverb.taps.channel(m);
    for (int mx = -order; mx <= order; ++mx)
      for (int my = -order; my <= order; ++my)
        for (int mz = -order; mz <= order; ++mz) {
          const int idx[3] = {mx, my, mz};
          for (int q = 0; q < 8; ++q) {
            const int qs[3] = {q & 1, (q >> 1) & 1, (q >> 2) & 1};
            double gain = 1.0;
            Vec3 rel{};
            for (int ax = 0; ax < 3; ++ax) {
              rel[ax] = (1 - 2 * qs[ax]) * src[ax] + 2.0 * idx[ax] * dims[ax] - r[ax];
              const int near_hits = std::abs(idx[ax] - qs[ax]);
              const int far_hits = std::abs(idx[ax]);
              if (near_hits) gain *= std::pow(beta[2 * ax], near_hits);
              if (far_hits) gain *= std::pow(beta[2 * ax + 1], far_hits);
            }
            if (gain == 0.0) continue;
            const double dist = norm(rel);
            const double amp = gain / (4.0 * std::numbers::pi * dist);
            const bool is_direct = mx == 0 && my == 0 && mz == 0 && q == 0;
            dsp::add_fractional_impulse(is_direct ? direct : reverb, dist * samples_per_metre, amp);
          }
        }
  }
  parts.reverb.direct_tap_index = parts.direct.direct_tap_index;
  parts.reverb.direct_delay = parts.direct.direct_delay;
  return parts;
}

inline RoomImpulseResponse simulate_rir(const SceneSpec& s, std::size_t source_index, const RirOptions& opt = {}) {
  auto parts = simulate_rir_parts(s, source_index, opt);
  RoomImpulseResponse out = std::move(parts.direct);
  auto& taps = out.taps.data();
  const auto& rev = parts.reverb.taps.data();
  for (std::size_t i = 0; i < taps.size(); ++i) taps[i] += rev[i];
  return out;
}

// RT60 from the Schroeder backward-integrated energy decay, extrapolated
// from a least-squares line over the -5 dB .. -25 dB range.
inline double schroeder_rt60(std::span<const double> rir, int sample_rate) {
  std::vector<double> edc(rir.size() + 1, 0.0);
  for (std::size_t i = rir.size(); i-- > 0;) edc[i] = edc[i + 1] + rir[i] * rir[i];
  detail::require(edc[0] > 0.0, "impulse response has no energy");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < rir.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / edc[0]);
    if (db > -5.0) continue;
    if (db < -25.0) break;
    const double t = static_cast<double>(i) / sample_rate;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++n;
  }
  detail::require(n >= 2, "energy decay too short to fit");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -60.0 / slope;
}

inline clue::DoAClue ground_truth_doa(const SceneSpec& s, std::size_t source_index) {
  detail::require(source_index < s.sources.size(), "source index out of range");
  const Vec3 v = s.sources[source_index].position - s.array_center;
  const double r = norm(v);
  detail::require(r > 1e-9, "source " + std::to_string(source_index) + " sits at the array centre");
  return clue::DoAClue(std::acos(std::clamp(v[2] / r, -1.0, 1.0)), std::atan2(v[1], v[0]));
}

// Frame-wise activity of a stem on the STFT frame grid: frame RMS over all
// channels, gated at gate_db relative to the loudest frame.
inline std::vector<double> frame_activation(const MultichannelWaveform& stem,
                                            std::size_t frame_len = spectral::kDefaultFftSize,
                                            std::size_t hop = spectral::kDefaultHop,
                                            double gate_db = kActivationGateDb) {
  const std::size_t frames = spectral::num_frames(stem.samples(), hop);
  std::vector<double> rms(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const long start = spectral::frame_start(t, hop, frame_len);
    double e = 0.0;
    for (std::size_t m = 0; m < stem.channels(); ++m) {
      const auto x = stem.channel(m);
      for (std::size_t i = 0; i < frame_len; ++i) {
        const long n = start + static_cast<long>(i);
        if (n >= 0 && n < static_cast<long>(x.size())) e += x[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(n)];
      }
    }
    rms[t] = std::sqrt(e / static_cast<double>(frame_len * stem.channels()));
  }
  const double peak = *std::max_element(rms.begin(), rms.end());
  const double floor = peak * std::pow(10.0, gate_db / 20.0);
  std::vector<double> act(frames, 0.0);
  if (peak <= 0.0) return act;
  for (std::size_t t = 0; t < frames; ++t) act[t] = rms[t] >= floor ? 1.0 : 0.0;
  return act;
}

struct SourceTruth {
  MultichannelWaveform direct;
  MultichannelWaveform reverb;
  clue::DoAClue doa;
  std::vector<double> activation;
};

struct SceneTruth {
  std::vector<SourceTruth> sources;
  std::optional<MultichannelWaveform> noise;
};

struct RenderedScene {
  MultichannelWaveform mixture;
  SceneTruth truth;
};

// Mono source signals (already at the scene rate) plus an optional noise
// signal that is either M-channel or mono.
struct SceneSignals {
  std::vector<std::vector<double>> sources;
  std::optional<MultichannelWaveform> noise;
};

inline double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

// SplitMix64 finaliser, used to derive independent per-item seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::size_t scene_length(const SceneSpec& s, const SceneSignals& sig) {
  if (s.duration_s) return static_cast<std::size_t>(std::llround(*s.duration_s * s.sample_rate));
  std::size_t len = 0;
  for (const auto& x : sig.sources) len = std::max(len, x.size());
  return len;
}

inline RenderedScene render_scene(const SceneSpec& s, const SceneSignals& sig, const RirOptions& opt = {}) {
  validate_scene(s);
  detail::require(sig.sources.size() == s.sources.size(),
                  "scene has " + std::to_string(s.sources.size()) + " sources but " +
                      std::to_string(sig.sources.size()) + " signals were supplied");
  const std::size_t length = scene_length(s, sig);
  detail::require(length > 0, "scene has zero length");
  const std::size_t mics = s.num_mics();

  RenderedScene out{MultichannelWaveform(mics, length, s.sample_rate), {}};
  for (std::size_t j = 0; j < s.sources.size(); ++j) {
    const auto& x = sig.sources[j];
    for (double v : x) detail::require(std::isfinite(v), "source " + std::to_string(j) + " contains NaN or Inf");
    if (s.duration_s)
      detail::require(x.size() >= length, "source " + std::to_string(j) + " signal is shorter than duration_s");
    const double gain = db_to_gain(s.sources[j].gain_db);
    std::vector<double> scaled(std::min(x.size(), length));
    for (std::size_t n = 0; n < scaled.size(); ++n) scaled[n] = gain * x[n];

    const auto parts = simulate_rir_parts(s, j, opt);
    SourceTruth truth{MultichannelWaveform(mics, length, s.sample_rate),
                      MultichannelWaveform(mics, length, s.sample_rate), ground_truth_doa(s, j), {}};
    for (std::size_t m = 0; m < mics; ++m) {
      const auto d = fft::convolve(scaled, parts.direct.taps.channel(m));
      const auto r = fft::convolve(scaled, parts.reverb.taps.channel(m));
      auto dst_d = truth.direct.channel(m);
      auto dst_r = truth.reverb.channel(m);
      for (std::size_t n = 0; n < length && n < d.size(); ++n) {
        dst_d[n] = d[n];
        dst_r[n] = r[n];
      }
    }
    truth.activation = frame_activation(truth.direct);
    out.truth.sources.push_back(std::move(truth));
  }

  if (sig.noise) {
    const auto& nz = *sig.noise;
    detail::require(nz.all_finite(), "noise contains NaN or Inf");
    detail::require(nz.channels() == 1 || nz.channels() == mics,
                    "noise must be mono or have one channel per microphone");
    detail::require(nz.samples() >= length, "noise signal is shorter than the scene");
    const double gain = db_to_gain(s.noise ? s.noise->gain_db : 0.0);
    MultichannelWaveform stem(mics, length, s.sample_rate);
    std::mt19937_64 rng(mix_seed(s.seed, 0x6e6f697365ull));
    std::uniform_int_distribution<std::size_t> shift(0, nz.samples() - 1);
    for (std::size_t m = 0; m < mics; ++m) {
      // Mono noise is decorrelated across mics by seeded circular shifts.
      const std::size_t ch = nz.channels() == 1 ? 0 : m;
      const std::size_t offset = nz.channels() == 1 ? shift(rng) : 0;
      const auto src = nz.channel(ch);
      auto dst = stem.channel(m);
      for (std::size_t n = 0; n < length; ++n) dst[n] = gain * src[(n + offset) % src.size()];
    }
    out.truth.noise = std::move(stem);
  }

  for (std::size_t m = 0; m < mics; ++m) {
    auto mix = out.mixture.channel(m);
    for (const auto& src : out.truth.sources) {
      const auto d = src.direct.channel(m);
      const auto r = src.reverb.channel(m);
      for (std::size_t n = 0; n < length; ++n) mix[n] += d[n] + r[n];
    }
    if (out.truth.noise) {
      const auto nz = out.truth.noise->channel(m);
      for (std::size_t n = 0; n < length; ++n) mix[n] += nz[n];
    }
  }
  return out;
}

// Source references are WAV paths relative to base_dir, or built-in
// generators: "synth:noise" (white Gaussian, sigma 0.1), "synth:impulse"
// (unit impulse at sample 0) and "synth:tone:<hz>" (sine, amplitude 0.5).
// Generators need duration_s and draw from a seed derived from
// (scene seed, source index).
inline std::vector<double> synthesize(const std::string& ref, std::size_t length, int sample_rate,
                                      std::uint64_t seed) {
  std::vector<double> x(length, 0.0);
  if (ref == "synth:noise") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.1);
    for (double& v : x) v = g(rng);
  } else if (ref == "synth:impulse") {
    if (length > 0) x[0] = 1.0;
  } else if (ref.rfind("synth:tone:", 0) == 0) {
    double hz = 0.0;
    try {
      hz = std::stod(ref.substr(11));
    } catch (const std::exception&) {
      throw InvalidInput("bad tone frequency in '" + ref + "'");
    }
    for (std::size_t n = 0; n < length; ++n)
      x[n] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(n) / sample_rate);
  } else {
    throw InvalidInput("unknown generator '" + ref + "'");
  }
  return x;
}

inline bool is_generator(const std::string& ref) { return ref.rfind("synth:", 0) == 0; }

inline SceneSignals load_scene_signals(const SceneSpec& s, const std::filesystem::path& base_dir) {
  SceneSignals sig;
  const auto length = s.duration_s ? static_cast<std::size_t>(std::llround(*s.duration_s * s.sample_rate)) : 0;
  auto resolve = [&](const std::string& ref, std::uint64_t salt) -> MultichannelWaveform {
    if (is_generator(ref)) {
      detail::require(s.duration_s.has_value(), "generator '" + ref + "' needs duration_s");
      return MultichannelWaveform::from_channels({synthesize(ref, length, s.sample_rate, mix_seed(s.seed, salt))},
                                                 s.sample_rate);
    }
    const auto path = std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref) : base_dir / ref;
    auto w = audio::read_wav(path);
    detail::require(w.sample_rate() == s.sample_rate, path.string() + " has rate " +
                                                          std::to_string(w.sample_rate()) + ", scene expects " +
                                                          std::to_string(s.sample_rate));
    return w;
  };
  for (std::size_t j = 0; j < s.sources.size(); ++j) {
    auto w = resolve(s.sources[j].wav, j);
    detail::require(w.channels() == 1, "source " + std::to_string(j) + " audio must be mono");
    const auto ch = w.channel(0);
    sig.sources.emplace_back(ch.begin(), ch.end());
  }
  if (s.noise) sig.noise = resolve(s.noise->wav, 1000);
  return sig;
}

}  // namespace soundcompass::roomsim
