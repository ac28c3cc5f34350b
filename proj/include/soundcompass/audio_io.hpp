// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "soundcompass/error.hpp"
#include "soundcompass/waveform.hpp"

// RIFF/WAVE reader and writer for 16-bit PCM and 32-bit IEEE float data,
// any channel count, little-endian.

namespace soundcompass::audio {

enum class WavEncoding { kPcm16, kFloat32 };

namespace detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
inline void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace detail

// Parses an in-memory WAV image. PCM16 samples are scaled by 1/32768.
inline MultichannelWaveform decode_wav(const std::vector<std::uint8_t>& bytes,
                                       const std::string& name = "<memory>") {
  using detail::get_u16;
  using detail::get_u32;
  auto fail = [&](const std::string& why) { throw InvalidInput(name + ": " + why); };

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) fail("truncated fmt chunk");
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == detail::kFormatExtensible) {
        if (size < 40) fail("truncated extensible fmt chunk");
        format = get_u16(chunk + 32);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size()) fail("truncated data chunk");
      data = chunk + 8;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");
  if (channels == 0) fail("zero channels");
  if (rate == 0) fail("zero sample rate");

  std::size_t bytes_per_sample = 0;
  if (format == detail::kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == detail::kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    fail("unsupported encoding (format " + std::to_string(format) + ", " +
         std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes = bytes_per_sample * channels;
  if (data_size % frame_bytes != 0) fail("truncated sample frame");
  const std::size_t frames = data_size / frame_bytes;

  MultichannelWaveform w(channels, frames, static_cast<int>(rate));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t m = 0; m < channels; ++m) {
      const std::uint8_t* p = data + n * frame_bytes + m * bytes_per_sample;
      if (bytes_per_sample == 2) {
        const auto v = static_cast<std::int16_t>(get_u16(p));
        w.at(m, n) = static_cast<double>(v) / 32768.0;
      } else {
        w.at(m, n) = static_cast<double>(std::bit_cast<float>(get_u32(p)));
      }
    }
  }
  return w;
}

inline MultichannelWaveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

inline std::vector<std::uint8_t> encode_wav(const MultichannelWaveform& w, WavEncoding enc) {
  using detail::put_tag;
  using detail::put_u16;
  using detail::put_u32;
  if (w.channels() == 0) throw InvalidInput("cannot encode a waveform with zero channels");
  if (!w.all_finite()) throw InvalidInput("cannot encode non-finite samples");

  const bool pcm = enc == WavEncoding::kPcm16;
  if (pcm) {
    for (double v : w.data())
      if (std::abs(v) > 1.0)
        throw InvalidInput("sample magnitude " + std::to_string(v) + " exceeds pcm16 full scale");
  }
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto channels = static_cast<std::uint16_t>(w.channels());
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(w.samples() * w.channels() * bytes_per_sample);
  const std::uint32_t fmt_size = pcm ? 16 : 18;
  const std::uint32_t fact_size = pcm ? 0 : 12;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size + fact_size);
  put_tag(out, "RIFF");
  put_u32(out, 4 + (8 + fmt_size) + fact_size + (8 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, fmt_size);
  put_u16(out, pcm ? detail::kFormatPcm : detail::kFormatFloat);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate()) * channels * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put_u16(out, bits);
  if (!pcm) {
    put_u16(out, 0);
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, static_cast<std::uint32_t>(w.samples()));
  }
  put_tag(out, "data");
  put_u32(out, data_size);
  for (std::size_t n = 0; n < w.samples(); ++n) {
    for (std::size_t m = 0; m < w.channels(); ++m) {
      const double v = w.at(m, n);
      if (pcm) {
        const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      }
    }
  }
  return out;
}

inline void write_wav(const MultichannelWaveform& w, const std::filesystem::path& path,
                      WavEncoding enc = WavEncoding::kFloat32) {
  const auto bytes = encode_wav(w, enc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace soundcompass::audio
