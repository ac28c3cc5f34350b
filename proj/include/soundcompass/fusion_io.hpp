// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <utility>
#include <string>
#include <vector>

#include <json.hpp>

#include "soundcompass/error.hpp"
#include "soundcompass/fusion.hpp"

// Weight files: a JSON manifest naming each tensor with its shape and
// element offset, next to a flat little-endian float32 blob.

namespace soundcompass::fusion {

inline constexpr const char* kWeightFormat = "soundcompass-fusion-weights";

namespace detail {

inline std::vector<std::size_t> shape_of(const NamedSpan& s, const FusionWeights& w) {
  const auto ends_with = [&](const std::string& suffix) {
    return s.name.size() >= suffix.size() && s.name.compare(s.name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".clue.weight")) return {w.hidden, w.clue_dim};
  if (ends_with(".feature.weight")) return {s.values.size() / w.in_channels, w.in_channels};
  if (ends_with(".gamma.weight") || ends_with(".beta.weight")) return {s.values.size() / w.hidden, w.hidden};
  return {s.values.size()};
}

}  // namespace detail

inline void save_weights(FusionWeights w, const std::filesystem::path& manifest_path) {
  auto blob_path = manifest_path;
  blob_path.replace_extension(".bin");
  nlohmann::json manifest;
  manifest["format"] = kWeightFormat;
  manifest["dtype"] = "float32";
  manifest["byte_order"] = "little";
  manifest["data_file"] = blob_path.filename().string();
  manifest["in_channels"] = w.in_channels;
  manifest["clue_dim"] = w.clue_dim;
  manifest["hidden"] = w.hidden;
  std::vector<std::size_t> band_channels;
  for (const auto& b : w.bands) band_channels.push_back(b.film.channels);
  manifest["band_channels"] = band_channels;

  std::vector<std::uint8_t> bytes;
  std::size_t offset = 0;
  manifest["tensors"] = nlohmann::json::array();
  for (const auto& s : fusion_parameters(w)) {
    manifest["tensors"].push_back({{"name", s.name}, {"shape", detail::shape_of(s, w)}, {"offset", offset}});
    for (double v : s.values) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
    }
    offset += s.values.size();
  }
  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  if (!blob) throw IoError("cannot write " + blob_path.string());
  blob.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  std::ofstream mf(manifest_path, std::ios::trunc);
  if (!mf) throw IoError("cannot write " + manifest_path.string());
  mf << manifest.dump(2) << "\n";
}

inline FusionWeights load_weights(const std::filesystem::path& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(manifest_path.string() + ": " + e.what());
  }
  soundcompass::detail::require(manifest.value("format", "") == kWeightFormat, "not a fusion weight manifest");
  soundcompass::detail::require(manifest.value("dtype", "") == "float32", "weights must be float32");

  const auto in_channels = manifest.at("in_channels").get<std::size_t>();
  const auto clue_dim = manifest.at("clue_dim").get<std::size_t>();
  const auto hidden = manifest.at("hidden").get<std::size_t>();
  const auto band_channels = manifest.at("band_channels").get<std::vector<std::size_t>>();

  FusionWeights w{in_channels, clue_dim, hidden, {}};
  std::mt19937_64 rng(0);
  for (std::size_t c : band_channels) {
    BandWeights b;
    b.feature_encoder = init_block(in_channels, c, rng);
    b.film = init_film(clue_dim, hidden, c, rng);
    w.bands.push_back(std::move(b));
  }

  const auto blob_path = manifest_path.parent_path() / manifest.at("data_file").get<std::string>();
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw IoError("cannot open " + blob_path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  std::map<std::string, std::pair<std::size_t, std::size_t>> index;  // name -> (offset, count)
  for (const auto& t : manifest.at("tensors")) {
    std::size_t count = 1;
    for (auto d : t.at("shape").get<std::vector<std::size_t>>()) count *= d;
    index[t.at("name").get<std::string>()] = {t.at("offset").get<std::size_t>(), count};
  }
  for (auto& s : fusion_parameters(w)) {
    auto it = index.find(s.name);
    soundcompass::detail::require(it != index.end(), "weight file is missing tensor " + s.name);
    const auto [offset, count] = it->second;
    soundcompass::detail::require(count == s.values.size(), "tensor " + s.name + " has the wrong shape");
    soundcompass::detail::require((offset + count) * 4 <= bytes.size(), "weight blob is truncated");
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint8_t* p = bytes.data() + (offset + i) * 4;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
      s.values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return w;
}

}  // namespace soundcompass::fusion
