// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "soundcompass/scene.hpp"
#include "test_util.hpp"

namespace soundcompass {
namespace {

const char* kValidScene = R"({
  "room_dims": [5.57, 5.20, 3.79],
  "rt60_s": 0.32,
  "array_center": [2.8, 2.6, 1.5],
  "array": "tetrahedral_4ch_r0.042",
  "sources": [
    {"position": [1.0, 1.0, 1.2], "class": "speech", "gain_db": 0.0, "wav": "a.wav"},
    {"position": [4.0, 3.5, 1.6], "class": "dog", "gain_db": -6.0, "wav": "b.wav"}
  ],
  "noise": {"wav": "n.wav", "gain_db": -20.0},
  "seed": 42
})";

TEST(Scene, ParsesValidScene) {
  const auto s = parse_scene_text(kValidScene);
  EXPECT_EQ(s.sources.size(), 2u);
  EXPECT_EQ(s.num_mics(), 4u);
  EXPECT_EQ(s.sources[1].class_label, "dog");
  EXPECT_DOUBLE_EQ(s.sources[1].gain_db, -6.0);
  ASSERT_TRUE(s.noise.has_value());
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.sample_rate, 16000);
}

TEST(Scene, SerializeRoundTrip) {
  const auto s = parse_scene_text(kValidScene);
  EXPECT_EQ(parse_scene_text(serialize_scene(s)), s);
  auto explicit_array = s;
  explicit_array.array_preset.clear();
  EXPECT_EQ(parse_scene_text(serialize_scene(explicit_array)), explicit_array);
}

TEST(Scene, SourceOutsideRoomIsRejected) {
  std::string text = kValidScene;
  text.replace(text.find("[4.0, 3.5, 1.6]"), 15, "[4.0, 5.5, 1.6]");
  try {
    parse_scene_text(text);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("source outside room"), std::string::npos);
  }
}

TEST(Scene, SourceOnWallIsNotStrictlyInside) {
  std::string text = kValidScene;
  text.replace(text.find("[1.0, 1.0, 1.2]"), 15, "[0.0, 1.0, 1.2]");
  EXPECT_THROW(parse_scene_text(text), InvalidInput);
}

TEST(Scene, MicrophoneOutsideRoomIsRejected) {
  std::string text = kValidScene;
  text.replace(text.find("[2.8, 2.6, 1.5]"), 15, "[2.8, 2.6, 0.01]");
  EXPECT_THROW(parse_scene_text(text), InvalidInput);
}

TEST(Scene, UnknownKeysAndBadTypesAreRejected) {
  std::string extra = kValidScene;
  extra.insert(extra.find("\"seed\""), "\"colour\": 1, ");
  EXPECT_THROW(parse_scene_text(extra), InvalidInput);
  std::string bad_type = kValidScene;
  bad_type.replace(bad_type.find("\"seed\": 42"), 10, "\"seed\": \"x\"");
  EXPECT_THROW(parse_scene_text(bad_type), InvalidInput);
  EXPECT_THROW(parse_scene_text("{not json"), InvalidInput);
}

TEST(Scene, RequiresExactlyOneAcousticDescription) {
  std::string both = kValidScene;
  both.insert(both.find("\"seed\""), "\"absorption\": [0.2, 0.2, 0.2, 0.2, 0.2, 0.2], ");
  EXPECT_THROW(parse_scene_text(both), InvalidInput);
  std::string neither = kValidScene;
  neither.replace(neither.find("\"rt60_s\": 0.32,"), 15, "");
  EXPECT_THROW(parse_scene_text(neither), InvalidInput);
}

TEST(Scene, LibraryAcceptsSingleSource) {
  const auto s = testing::anechoic_scene({{1.0, 1.0, 1.0}});
  EXPECT_NO_THROW(validate_scene(s));
}

TEST(Scene, SabineAbsorptionInvertsRt60) {
  const Vec3 dims{5.57, 5.20, 3.79};
  const double alpha = sabine_absorption(dims, 0.32);
  const double rt60 = 0.161 * room_volume(dims) / (room_surface(dims) * alpha);
  // 0.161 is the rounded Sabine constant 24 ln 10 / 343.
  EXPECT_NEAR(rt60, 0.32, 0.32 * 1e-3);
  EXPECT_THROW(sabine_absorption(dims, 0.01), InvalidInput);
}

TEST(Scene, TetrahedronGeometry) {
  const auto mics = tetrahedral_offsets();
  ASSERT_EQ(mics.size(), 4u);
  Vec3 centroid{};
  for (const auto& m : mics) {
    EXPECT_NEAR(norm(m), kTetrahedralRadius, 1e-15);
    centroid = centroid + m;
  }
  EXPECT_NEAR(norm(centroid), 0.0, 1e-15);
  const double edge = kTetrahedralRadius * std::sqrt(8.0 / 3.0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_NEAR(norm(mics[i] - mics[j]), edge, 1e-14);
}

}  // namespace
}  // namespace soundcompass
