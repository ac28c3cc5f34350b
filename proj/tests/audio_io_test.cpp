// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "soundcompass/audio_io.hpp"
#include "test_util.hpp"

namespace soundcompass {
namespace {

using audio::WavEncoding;

// Minimal canonical WAV image built byte by byte, independent of encode_wav.
std::vector<std::uint8_t> handmade_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                       std::uint16_t bits, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  auto u16 = [&](std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  u32(36 + static_cast<std::uint32_t>(payload.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

TEST(AudioIo, SilentMonoDecodesToZeros) {
  const auto w = audio::decode_wav(handmade_wav(1, 1, 16000, 16, std::vector<std::uint8_t>(32, 0)));
  EXPECT_EQ(w.channels(), 1u);
  EXPECT_EQ(w.samples(), 16u);
  EXPECT_EQ(w.sample_rate(), 16000);
  for (double v : w.data()) EXPECT_EQ(v, 0.0);
}

TEST(AudioIo, Pcm16FullScaleScaling) {
  // +32767, -32768 little endian.
  const auto w = audio::decode_wav(handmade_wav(1, 1, 8000, 16, {0xff, 0x7f, 0x00, 0x80}));
  EXPECT_DOUBLE_EQ(w.at(0, 0), 32767.0 / 32768.0);
  EXPECT_DOUBLE_EQ(w.at(0, 1), -1.0);
}

TEST(AudioIo, InterleavedChannelsAreSplit) {
  // Two channels, two frames: (1, -1), (2, -2) in raw counts.
  const auto w = audio::decode_wav(
      handmade_wav(1, 2, 16000, 16, {0x01, 0x00, 0xff, 0xff, 0x02, 0x00, 0xfe, 0xff}));
  ASSERT_EQ(w.channels(), 2u);
  EXPECT_DOUBLE_EQ(w.at(0, 1), 2.0 / 32768.0);
  EXPECT_DOUBLE_EQ(w.at(1, 0), -1.0 / 32768.0);
}

TEST(AudioIo, FourChannelFourSecondFileRoundTrips) {
  testing::TempDir dir;
  std::mt19937_64 rng(1);
  const auto w = testing::random_waveform(4, 64000, rng, 0.2);
  audio::write_wav(w, dir / "mix.wav");
  const auto r = audio::read_wav(dir / "mix.wav");
  EXPECT_EQ(r.channels(), 4u);
  EXPECT_EQ(r.samples(), 64000u);
  EXPECT_EQ(r.sample_rate(), 16000);
  for (std::size_t i = 0; i < w.data().size(); ++i)
    ASSERT_EQ(r.data()[i], static_cast<double>(static_cast<float>(w.data()[i])));
}

TEST(AudioIo, Float32RoundTripIsExactForFloatValues) {
  MultichannelWaveform w(2, 5, 44100);
  const double vals[] = {0.5, -0.25, 1.5, -3.0, 0.125};
  for (std::size_t n = 0; n < 5; ++n) {
    w.at(0, n) = vals[n];
    w.at(1, n) = -vals[n];
  }
  EXPECT_EQ(audio::decode_wav(audio::encode_wav(w, WavEncoding::kFloat32)), w);
}

TEST(AudioIo, Pcm16QuantizationWithinHalfStep) {
  std::mt19937_64 rng(2);
  auto w = testing::random_waveform(3, 1000, rng, 0.3);
  for (double& v : w.data()) v = std::clamp(v, -1.0, 1.0);
  const auto r = audio::decode_wav(audio::encode_wav(w, WavEncoding::kPcm16));
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    // +1.0 clamps to 32767, one full step below.
    const double tol = w.data()[i] >= 32767.0 / 32768.0 ? 1.0 / 32768.0 : 0.5 / 32768.0;
    ASSERT_NEAR(r.data()[i], w.data()[i], tol + 1e-15);
  }
}

TEST(AudioIo, RejectsUnsupportedEncoding) {
  // 24-bit PCM and A-law.
  EXPECT_THROW(audio::decode_wav(handmade_wav(1, 1, 16000, 24, std::vector<std::uint8_t>(6, 0))), InvalidInput);
  EXPECT_THROW(audio::decode_wav(handmade_wav(6, 1, 16000, 8, std::vector<std::uint8_t>(4, 0))), InvalidInput);
}

TEST(AudioIo, RejectsTruncatedFile) {
  auto bytes = handmade_wav(1, 2, 16000, 16, std::vector<std::uint8_t>(40, 0));
  bytes.resize(bytes.size() - 10);
  EXPECT_THROW(audio::decode_wav(bytes), InvalidInput);
  auto odd = handmade_wav(1, 2, 16000, 16, std::vector<std::uint8_t>(6, 0));  // 1.5 frames
  EXPECT_THROW(audio::decode_wav(odd), InvalidInput);
  EXPECT_THROW(audio::decode_wav(std::vector<std::uint8_t>(8, 0)), InvalidInput);
}

TEST(AudioIo, RejectsZeroChannels) {
  EXPECT_THROW(audio::decode_wav(handmade_wav(1, 0, 16000, 16, {})), InvalidInput);
}

TEST(AudioIo, WriteRejectsNonFiniteAndPcmOverload) {
  MultichannelWaveform w(1, 3, 16000);
  w.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(audio::encode_wav(w, WavEncoding::kFloat32), InvalidInput);
  w.at(0, 1) = 1.5;
  EXPECT_THROW(audio::encode_wav(w, WavEncoding::kPcm16), InvalidInput);
  EXPECT_NO_THROW(audio::encode_wav(w, WavEncoding::kFloat32));
}

TEST(AudioIo, MissingFileIsIoError) {
  EXPECT_THROW(audio::read_wav("/nonexistent/soundcompass.wav"), IoError);
}

TEST(AudioIo, WaveformRejectsRaggedChannels) {
  EXPECT_THROW(MultichannelWaveform::from_channels({{1.0, 2.0}, {1.0}}, 16000), InvalidInput);
  EXPECT_THROW(MultichannelWaveform(1, 4, 0), InvalidInput);
}

}  // namespace
}  // namespace soundcompass
