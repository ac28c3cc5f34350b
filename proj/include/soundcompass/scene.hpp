// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundcompass/dsp.hpp"
#include "soundcompass/error.hpp"

namespace soundcompass {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline constexpr const char* kTetrahedralPreset = "tetrahedral_4ch_r0.042";
inline constexpr double kTetrahedralRadius = 0.042;

// Regular tetrahedron with circumradius r: one vertex on +z, the other three
// on the plane z = -r/3, the first of them in the +x half-plane.
inline std::vector<Vec3> tetrahedral_offsets(double radius = kTetrahedralRadius) {
  const double ring = radius * 2.0 * std::numbers::sqrt2 / 3.0;
  const double z = -radius / 3.0;
  std::vector<Vec3> out{{0.0, 0.0, radius}};
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    out.push_back({ring * std::cos(a), ring * std::sin(a), z});
  }
  return out;
}

struct SourceSpec {
  Vec3 position{};
  std::string class_label;
  double gain_db = 0.0;
  std::string wav;
  bool operator==(const SourceSpec&) const = default;
};

struct NoiseSpec {
  std::string wav;
  double gain_db = 0.0;
  bool operator==(const NoiseSpec&) const = default;
};

// Wall order for absorption: x=0, x=W, y=0, y=L, z=0, z=H.
using WallAbsorption = std::array<double, 6>;

struct SceneSpec {
  Vec3 room_dims{};
  std::optional<double> rt60_s;
  std::optional<WallAbsorption> absorption;
  Vec3 array_center{};
  std::string array_preset;  // empty when offsets were given explicitly
  std::vector<Vec3> mic_offsets;
  std::vector<SourceSpec> sources;
  std::optional<NoiseSpec> noise;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  std::optional<double> duration_s;

  std::size_t num_mics() const { return mic_offsets.size(); }
  Vec3 mic_position(std::size_t m) const { return array_center + mic_offsets[m]; }

  bool operator==(const SceneSpec&) const = default;
};

inline double room_volume(const Vec3& d) { return d[0] * d[1] * d[2]; }
inline double room_surface(const Vec3& d) {
  return 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
}

// Uniform absorption from Sabine's formula: RT60 = 24 ln(10) V / (c S alpha).
inline double sabine_absorption(const Vec3& dims, double rt60_s) {
  detail::require(rt60_s > 0.0, "rt60 must be positive");
  const double alpha = 24.0 * std::numbers::ln10 * room_volume(dims) /
                       (dsp::kSpeedOfSound * room_surface(dims) * rt60_s);
  detail::require(alpha <= 1.0, "rt60 " + std::to_string(rt60_s) +
                                    " s is shorter than the room supports with full absorption");
  return alpha;
}

// Per-wall absorption coefficients, resolving rt60_s through Sabine.
inline WallAbsorption wall_absorption(const SceneSpec& s) {
  if (s.absorption) return *s.absorption;
  if (s.rt60_s) {
    const double a = sabine_absorption(s.room_dims, *s.rt60_s);
    return {a, a, a, a, a, a};
  }
  throw InvalidInput("scene has neither rt60_s nor absorption");
}

inline bool strictly_inside(const Vec3& p, const Vec3& dims) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0 && p[i] < dims[i])) return false;
  return true;
}

inline std::string format_vec(const Vec3& v) {
  std::ostringstream os;
  os << "[" << v[0] << ", " << v[1] << ", " << v[2] << "]";
  return os.str();
}

inline void validate_scene(const SceneSpec& s) {
  for (double d : s.room_dims) detail::require(d > 0.0 && std::isfinite(d), "room_dims must be positive");
  detail::require(s.rt60_s.has_value() != s.absorption.has_value(),
                  "exactly one of rt60_s or absorption is required");
  if (s.rt60_s) (void)sabine_absorption(s.room_dims, *s.rt60_s);
  if (s.absorption)
    for (double a : *s.absorption) detail::require(a >= 0.0 && a <= 1.0, "absorption must lie in [0, 1]");
  detail::require(!s.mic_offsets.empty(), "array has no microphones");
  for (std::size_t m = 0; m < s.mic_offsets.size(); ++m)
    detail::require(strictly_inside(s.mic_position(m), s.room_dims),
                    "microphone " + std::to_string(m) + " outside room");
  detail::require(!s.sources.empty(), "scene needs at least one source");
  for (std::size_t j = 0; j < s.sources.size(); ++j) {
    const auto& p = s.sources[j].position;
    detail::require(strictly_inside(p, s.room_dims),
                    "source outside room: source " + std::to_string(j) + " at " + format_vec(p) +
                        " not inside " + format_vec(s.room_dims));
    detail::require(std::isfinite(s.sources[j].gain_db), "source gain_db must be finite");
  }
  detail::require(s.sample_rate > 0, "sample_rate must be positive");
  if (s.duration_s) detail::require(*s.duration_s > 0.0, "duration_s must be positive");
}

namespace detail {

inline Vec3 vec3_from(const nlohmann::json& j, const std::string& key) {
  require(j.is_array() && j.size() == 3, "'" + key + "' must be an array of 3 numbers");
  Vec3 v{};
  for (std::size_t i = 0; i < 3; ++i) {
    require(j[i].is_number(), "'" + key + "' must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& key,
                                   const std::string& where) {
  auto it = obj.find(key);
  require(it != obj.end(), "missing field '" + key + "' in " + where);
  return *it;
}

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& [key, value] : obj.items())
    require(allowed.count(key) != 0, "unknown key '" + key + "' in " + where);
}

}  // namespace detail

inline SceneSpec scene_from_json(const nlohmann::json& j, bool strict = true) {
  using detail::field;
  using detail::require;
  require(j.is_object(), "scene must be a JSON object");
  if (strict)
    detail::check_keys(j, {"room_dims", "rt60_s", "absorption", "array_center", "array", "sources",
                           "noise", "seed", "sample_rate", "duration_s"},
                       "scene");
  SceneSpec s;
  s.room_dims = detail::vec3_from(field(j, "room_dims", "scene"), "room_dims");
  if (j.contains("rt60_s")) {
    require(j["rt60_s"].is_number(), "'rt60_s' must be a number");
    s.rt60_s = j["rt60_s"].get<double>();
  }
  if (j.contains("absorption")) {
    const auto& a = j["absorption"];
    require(a.is_array() && a.size() == 6, "'absorption' must be an array of 6 numbers");
    WallAbsorption w{};
    for (std::size_t i = 0; i < 6; ++i) {
      require(a[i].is_number(), "'absorption' must contain numbers");
      w[i] = a[i].get<double>();
    }
    s.absorption = w;
  }
  s.array_center = detail::vec3_from(field(j, "array_center", "scene"), "array_center");

  const auto& arr = field(j, "array", "scene");
  if (arr.is_string()) {
    s.array_preset = arr.get<std::string>();
    require(s.array_preset == kTetrahedralPreset, "unknown array preset '" + s.array_preset + "'");
    s.mic_offsets = tetrahedral_offsets();
  } else {
    require(arr.is_object(), "'array' must be a preset name or an object with 'offsets'");
    if (strict) detail::check_keys(arr, {"offsets"}, "array");
    const auto& offs = field(arr, "offsets", "array");
    require(offs.is_array() && !offs.empty(), "'offsets' must be a non-empty array");
    for (const auto& o : offs) s.mic_offsets.push_back(detail::vec3_from(o, "offsets"));
  }

  const auto& srcs = field(j, "sources", "scene");
  require(srcs.is_array(), "'sources' must be an array");
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    const auto& o = srcs[i];
    const std::string where = "sources[" + std::to_string(i) + "]";
    require(o.is_object(), where + " must be an object");
    if (strict) detail::check_keys(o, {"position", "class", "gain_db", "wav"}, where);
    SourceSpec src;
    src.position = detail::vec3_from(field(o, "position", where), "position");
    src.class_label = field(o, "class", where).get<std::string>();
    src.gain_db = field(o, "gain_db", where).get<double>();
    src.wav = field(o, "wav", where).get<std::string>();
    s.sources.push_back(std::move(src));
  }
  if (j.contains("noise") && !j["noise"].is_null()) {
    const auto& o = j["noise"];
    require(o.is_object(), "'noise' must be an object");
    if (strict) detail::check_keys(o, {"wav", "gain_db"}, "noise");
    s.noise = NoiseSpec{field(o, "wav", "noise").get<std::string>(),
                        field(o, "gain_db", "noise").get<double>()};
  }
  require(field(j, "seed", "scene").is_number_integer(), "'seed' must be an integer");
  s.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("sample_rate")) {
    require(j["sample_rate"].is_number_integer(), "'sample_rate' must be an integer");
    s.sample_rate = j["sample_rate"].get<int>();
  }
  if (j.contains("duration_s")) s.duration_s = j["duration_s"].get<double>();
  validate_scene(s);
  return s;
}

inline nlohmann::json scene_to_json(const SceneSpec& s) {
  nlohmann::json j;
  j["room_dims"] = s.room_dims;
  if (s.rt60_s) j["rt60_s"] = *s.rt60_s;
  if (s.absorption) j["absorption"] = *s.absorption;
  j["array_center"] = s.array_center;
  if (!s.array_preset.empty()) {
    j["array"] = s.array_preset;
  } else {
    j["array"] = {{"offsets", s.mic_offsets}};
  }
  j["sources"] = nlohmann::json::array();
  for (const auto& src : s.sources)
    j["sources"].push_back({{"position", src.position}, {"class", src.class_label},
                            {"gain_db", src.gain_db}, {"wav", src.wav}});
  if (s.noise) j["noise"] = {{"wav", s.noise->wav}, {"gain_db", s.noise->gain_db}};
  j["seed"] = s.seed;
  j["sample_rate"] = s.sample_rate;
  if (s.duration_s) j["duration_s"] = *s.duration_s;
  return j;
}

inline std::string serialize_scene(const SceneSpec& s) { return scene_to_json(s).dump(2); }

inline SceneSpec parse_scene_text(const std::string& text, bool strict = true) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("scene is not valid JSON: ") + e.what());
  }
  try {
    return scene_from_json(j, strict);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("scene has a field of the wrong type: ") + e.what());
  }
}

inline SceneSpec parse_scene(const std::filesystem::path& path, bool strict = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str(), strict);
}

}  // namespace soundcompass
