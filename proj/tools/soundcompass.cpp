// Copyright 2026 The SoundCompass Toolkit Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// soundcompass: command-line front end. Exit codes are 0 on success, 1 on an
// internal error and 2 on invalid input.

#include <CLI11.hpp>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "soundcompass/soundcompass.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace soundcompass;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

// Thrown by a command that has already reported its own errors.
struct ExitCode {
  int code;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_f32(const fs::path& path, std::span<const double> values) {
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xff);
  }
  write_text(path, std::string(bytes.begin(), bytes.end()));
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("SOUNDCOMPASS_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0' || *v == '-') throw InvalidInput(std::string("SOUNDCOMPASS_SEED is not an integer: ") + v);
  return s;
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr double kDeg = std::numbers::pi / 180.0;

json doa_to_json(const clue::DoAClue& d) {
  return {{"polar_rad", d.polar()},
          {"azimuth_rad", d.azimuth()},
          {"elevation_deg", d.elevation() / kDeg},
          {"azimuth_deg", d.azimuth() / kDeg}};
}

// ---------------------------------------------------------------- simulate

struct ManifestEntry {
  std::string id;
  SceneSpec spec;
};

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  return id != "." && id != "..";
}

// One scene object per non-blank line. "id" is optional and defaults to the
// zero-based line index among scenes.
std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidInput(where + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidInput(where + ": scene must be a JSON object");
    std::string id = std::to_string(out.size());
    if (j.contains("id")) {
      const auto& v = j["id"];
      if (v.is_string()) id = v.get<std::string>();
      else if (v.is_number_integer()) id = std::to_string(v.get<long long>());
      else throw InvalidInput(where + ": 'id' must be a string or integer");
      j.erase("id");
    }
    if (!valid_id(id)) throw InvalidInput(where + ": scene id '" + id + "' may only use [A-Za-z0-9_.-]");
    if (!seen.insert(id).second) throw InvalidInput(where + ": duplicate scene id '" + id + "'");
    try {
      out.push_back({id, scene_from_json(j)});
    } catch (const InvalidInput& e) {
      throw InvalidInput("scene " + id + ": " + e.what());
    } catch (const json::exception& e) {
      throw InvalidInput("scene " + id + ": field of the wrong type: " + e.what());
    }
  }
  if (out.empty()) throw InvalidInput(path.string() + " contains no scenes");
  return out;
}

void write_scene(const ManifestEntry& entry, const fs::path& base_dir, const fs::path& out_root) {
  const auto& spec = entry.spec;
  const auto signals = roomsim::load_scene_signals(spec, base_dir);
  const auto scene = roomsim::render_scene(spec, signals);
  const fs::path dir = out_root / ("scene_" + entry.id);
  fs::create_directories(dir);
  audio::write_wav(scene.mixture, dir / "mixture.wav");
  json sources = json::array();
  for (std::size_t j = 0; j < scene.truth.sources.size(); ++j) {
    const auto& src = scene.truth.sources[j];
    const std::string direct = "src" + std::to_string(j) + "_direct.wav";
    const std::string reverb = "src" + std::to_string(j) + "_reverb.wav";
    audio::write_wav(src.direct, dir / direct);
    audio::write_wav(src.reverb, dir / reverb);
    sources.push_back({{"index", j},
                       {"class", spec.sources[j].class_label},
                       {"direct", direct},
                       {"reverb", reverb},
                       {"doa", doa_to_json(src.doa)},
                       {"activation", src.activation}});
  }
  json truth = {{"scene_id", entry.id},
                {"sample_rate", spec.sample_rate},
                {"samples", scene.mixture.samples()},
                {"channels", scene.mixture.channels()},
                {"array_center", spec.array_center},
                {"array_offsets", spec.mic_offsets},
                {"image_order", roomsim::image_order_for(spec)},
                {"mixture", "mixture.wav"},
                {"sources", sources},
                {"noise", nullptr},
                {"scene", scene_to_json(spec)}};
  if (scene.truth.noise) {
    audio::write_wav(*scene.truth.noise, dir / "noise.wav");
    truth["noise"] = "noise.wav";
  }
  write_text(dir / "truth.json", truth.dump(2) + "\n");
}

struct SimulateArgs {
  std::string manifest;
  std::string out;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
  bool keep_going = false;
};

int run_simulate(const SimulateArgs& a) {
  auto entries = read_manifest(a.manifest);
  const auto seed = a.seed ? a.seed : env_seed();
  if (seed)
    for (auto& e : entries) e.spec.seed = roomsim::mix_seed(*seed, fnv1a(e.id));
  const fs::path base_dir = fs::absolute(a.manifest).parent_path();
  fs::create_directories(a.out);

  std::vector<std::string> errors(entries.size());
  std::vector<int> codes(entries.size(), 0);
  auto render_one = [&](std::size_t i) {
    try {
      write_scene(entries[i], base_dir, a.out);
    } catch (const InvalidInput& e) {
      errors[i] = e.what(), codes[i] = kExitInvalid;
    } catch (const IoError& e) {
      errors[i] = e.what(), codes[i] = kExitInvalid;
    } catch (const std::exception& e) {
      errors[i] = e.what(), codes[i] = kExitInternal;
    }
    if (codes[i] != 0 && !a.keep_going) throw ExitCode{codes[i]};
  };
  try {
    parallel_for(entries.size(), a.jobs, render_one);
  } catch (const ExitCode&) {
  }
  int status = 0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (codes[i] == 0) continue;
    std::cerr << "error: scene " << entries[i].id << ": " << errors[i] << "\n";
    if (status == 0) status = codes[i];
    if (!a.keep_going) break;
  }
  for (int c : codes) ok += c == 0;
  if (status != 0) return status;
  std::cout << "rendered " << ok << " scene(s) into " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------- featurize

struct FeaturizeArgs {
  std::string wav;
  std::size_t fft = spectral::kDefaultFftSize;
  std::size_t hop = spectral::kDefaultHop;
  std::string bands = "default";
  std::string out;
  double window_mean = 0.5;
  double window_std = 0.25;
  bool levels = false;
};

json shape_sidecar(const Tensor3& t, const std::string& file) {
  return {{"file", file},
          {"dtype", "float32"},
          {"byte_order", "little"},
          {"layout", "channel, frame, bin"},
          {"shape", {t.channels(), t.frames(), t.bins()}}};
}

int run_featurize(const FeaturizeArgs& a) {
  const auto w = audio::read_wav(a.wav);
  const spectral::GaussianWindowParams window{a.window_mean, a.window_std, a.fft};
  const auto spec = spectral::stft(w, window, a.fft, a.hop);
  const std::size_t bins = spec.bins();
  spectral::BandLayout layout;
  if (a.bands == "default") layout = spectral::make_band_layout(bins, w.sample_rate());
  else if (a.bands == "single") layout = spectral::single_band_layout(bins, w.sample_rate());
  else layout = spectral::read_layout(a.bands);
  spectral::validate_layout(layout, bins);

  const auto feat = spin::spin_forward(spec);
  fs::create_directories(a.out);
  const fs::path dir = a.out;
  write_f32(dir / "spin.f32", feat.values.data());
  json meta = shape_sidecar(feat.values, "spin.f32");
  meta["mics"] = feat.mics();
  meta["plane_index"] = "i * 2M + j; planes 0..M-1 are real parts, M..2M-1 imaginary parts";
  meta["sample_rate"] = w.sample_rate();
  meta["fft_size"] = a.fft;
  meta["hop"] = a.hop;
  meta["window"] = {{"kind", "gaussian"}, {"mean", a.window_mean}, {"std", a.window_std}, {"length", a.fft}};
  write_text(dir / "spin.json", meta.dump(2) + "\n");
  write_text(dir / "bands.json", spectral::layout_to_json(layout).dump(2) + "\n");
  if (a.levels) {
    const auto lv = spin::log_magnitudes(spec);
    write_f32(dir / "levels.f32", lv.data());
    write_text(dir / "levels.json", shape_sidecar(lv, "levels.f32").dump(2) + "\n");
  }
  std::cout << "spin " << feat.values.channels() << "x" << feat.values.frames() << "x" << feat.values.bins() << ", "
            << layout.size() << " bands -> " << a.out << "\n";
  return 0;
}

// -------------------------------------------------------------------- clue

struct ClueArgs {
  double az = 0.0;
  double el = 0.0;
  int order = 5;
  std::string kind = "sh";
  std::optional<std::size_t> dim;
  std::string activation;
  std::optional<std::size_t> frames;
  std::string out;
};

std::vector<double> read_activation(const fs::path& path) {
  const json j = read_json(path);
  const json& arr = j.is_object() && j.contains("activation") ? j["activation"] : j;
  if (!arr.is_array() || arr.empty()) throw InvalidInput(path.string() + ": activation must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw InvalidInput(path.string() + ": activation must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

int run_clue(const ClueArgs& a) {
  detail::require(a.el >= -90.0 && a.el <= 90.0, "--el must lie in [-90, 90] degrees");
  const auto d = clue::DoAClue::from_degrees(a.el, a.az);
  clue::ClueEmbedding emb;
  if (a.kind == "sh") {
    detail::require(!a.dim, "--dim only applies to --kind cyc-pos");
    emb = clue::encode_sh(d, a.order);
  } else {
    emb = clue::encode_cyc_pos(d, a.dim.value_or(clue::sh_embedding_dim(a.order)));
  }
  json out;
  if (!a.activation.empty()) {
    const auto act = read_activation(a.activation);
    const auto tv = clue::build_time_varying_clue(emb, act, a.frames.value_or(act.size()));
    out = clue::time_varying_to_json(emb, tv);
  } else {
    detail::require(!a.frames, "--frames needs --activation");
    out = clue::embedding_to_json(emb);
  }
  if (a.out.empty()) std::cout << out.dump() << "\n";
  else write_text(a.out, out.dump(2) + "\n");
  return 0;
}

// -------------------------------------------------------------- fuse-check

struct FuseCheckArgs {
  std::uint64_t seed = 0;
  std::size_t bands = 31;
  std::size_t frames = 3;
};

constexpr double kGradTolerance = 1e-5;

int run_fuse_check(const FuseCheckArgs& a) {
  const auto r = fusion::run_fuse_check(a.seed, a.bands, a.frames);
  std::cout << "bands " << r.bands << ", coordinates " << r.gradients.coordinates << ", skipped at kink "
            << r.gradients.skipped_at_kink << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", r.gradients.max_rel_error);
  std::cout << "max relative error " << buf << " (" << r.gradients.worst_parameter << ")\n";
  std::cout << "null modulation identity " << (r.null_modulation_exact ? "exact" : "VIOLATED") << "\n";
  return r.null_modulation_exact && r.gradients.max_rel_error <= kGradTolerance ? 0 : kExitInternal;
}

// ------------------------------------------------------ scene directories

struct SceneDir {
  fs::path dir;
  json truth;
  MultichannelWaveform mixture;
  std::vector<Vec3> offsets;

  std::size_t sources() const { return truth["sources"].size(); }

  const json& source(std::size_t j) const {
    detail::require(j < sources(), "source " + std::to_string(j) + " out of range; scene has " +
                                       std::to_string(sources()) + " source(s)");
    return truth["sources"][j];
  }

  MultichannelWaveform stem(std::size_t j, const std::string& key) const {
    return audio::read_wav(dir / source(j)[key].get<std::string>());
  }

  clue::DoAClue doa(std::size_t j) const {
    const auto& d = source(j)["doa"];
    return clue::DoAClue(d["polar_rad"].get<double>(), d["azimuth_rad"].get<double>());
  }
};

SceneDir load_scene_dir(const fs::path& dir) {
  SceneDir s;
  s.dir = dir;
  s.truth = read_json(dir / "truth.json");
  try {
    s.mixture = audio::read_wav(dir / s.truth.at("mixture").get<std::string>());
    for (const auto& o : s.truth.at("array_offsets")) s.offsets.push_back(o.get<Vec3>());
    detail::require(s.truth.at("sources").is_array(), "truth.json 'sources' must be an array");
  } catch (const json::exception& e) {
    throw InvalidInput((dir / "truth.json").string() + " is malformed: " + e.what());
  }
  detail::require(s.offsets.size() == s.mixture.channels(), "truth.json array does not match mixture channels");
  return s;
}

// ----------------------------------------------------------------- extract

struct ExtractArgs {
  std::string scene;
  double az = 0.0;
  double el = 0.0;
  std::string out;
};

int run_extract(const ExtractArgs& a) {
  detail::require(a.el >= -90.0 && a.el <= 90.0, "--el must lie in [-90, 90] degrees");
  const auto scene = load_scene_dir(a.scene);
  const auto est = beamformer::delay_and_sum(scene.mixture, scene.offsets, clue::DoAClue::from_degrees(a.el, a.az));
  audio::write_wav(est, a.out);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string est;
  std::string scene;
  std::size_t source = 0;
  std::string reference = "direct";
  std::string out;
};

MultichannelWaveform reference_stem(const SceneDir& s, std::size_t j, const std::string& kind) {
  if (kind == "direct") return s.stem(j, "direct");
  auto ref = s.stem(j, "direct");
  const auto rev = s.stem(j, "reverb");
  detail::require(rev.samples() == ref.samples() && rev.channels() == ref.channels(), "stems differ in shape");
  for (std::size_t i = 0; i < ref.data().size(); ++i) ref.data()[i] += rev.data()[i];
  return ref;
}

int run_evaluate(const EvaluateArgs& a) {
  const auto scene = load_scene_dir(a.scene);
  const auto est = audio::read_wav(a.est);
  const auto ref = reference_stem(scene, a.source, a.reference);
  detail::require(est.channels() == ref.channels() && est.samples() == ref.samples(),
                  "estimate shape " + std::to_string(est.channels()) + "x" + std::to_string(est.samples()) +
                      " does not match reference " + std::to_string(ref.channels()) + "x" +
                      std::to_string(ref.samples()));
  metrics::ReportRow row{scene.truth.value("scene_id", fs::path(a.scene).filename().string()),
                         std::to_string(a.source), metrics::evaluate(est, ref, scene.mixture)};
  std::ostringstream csv;
  metrics::write_report_csv(csv, {row});
  if (a.out.empty()) std::cout << csv.str();
  else write_text(a.out, csv.str());
  if (row.report.undefined_pairs > 0)
    std::cerr << "warning: " << row.report.undefined_pairs << " channel pair(s) had undefined spatial cues\n";
  return 0;
}

// ----------------------------------------------------------------- contour

struct ContourArgs {
  std::string scene;
  std::size_t source = 0;
  double span = 15.0;
  double step = 2.5;
  std::string reference = "direct";
  std::size_t jobs = 1;
  std::string out;
};

int run_contour(const ContourArgs& a) {
  const auto scene = load_scene_dir(a.scene);
  const auto ref = reference_stem(scene, a.source, a.reference);
  const auto grid = beamformer::steering_contour(scene.mixture, ref, scene.offsets, scene.doa(a.source), a.span,
                                                 a.step, a.jobs);
  std::ostringstream csv;
  csv << "d_az,d_el,si_snri_db\n";
  for (const auto& p : grid) csv << fmt(p.d_az_deg, 4) << "," << fmt(p.d_el_deg, 4) << "," << fmt(p.si_snri_db) << "\n";
  write_text(a.out, csv.str());
  std::cout << grid.size() << " grid points -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SoundCompass spatial-audio toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Render scenes from a JSONL manifest");
  c_sim->add_option("--manifest", sim.manifest, "JSONL manifest, one scene per line")->required();
  c_sim->add_option("--out", sim.out, "Output directory")->required();
  c_sim->add_option("--jobs", sim.jobs, "Scenes rendered in parallel")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Base seed (default: SOUNDCOMPASS_SEED, else per-scene seeds)");
  c_sim->add_flag("--keep-going", sim.keep_going, "Render remaining scenes after a failure");

  FeaturizeArgs feat;
  auto* c_feat = app.add_subcommand("featurize", "Dump SPIN features and the band layout");
  c_feat->add_option("--wav", feat.wav, "Multichannel input WAV")->required();
  c_feat->add_option("--fft", feat.fft, "FFT size (= window length)")->check(CLI::Range(2, 1 << 20));
  c_feat->add_option("--hop", feat.hop, "Hop size")->check(CLI::PositiveNumber);
  c_feat->add_option("--bands", feat.bands, "default | single | path to layout JSON");
  c_feat->add_option("--window-mean", feat.window_mean, "Gaussian window centre as a fraction of its length");
  c_feat->add_option("--window-std", feat.window_std, "Gaussian window deviation as a fraction of its length");
  c_feat->add_flag("--levels", feat.levels, "Also write per-channel log magnitudes");
  c_feat->add_option("--out", feat.out, "Output directory")->required();

  ClueArgs cl;
  auto* c_clue = app.add_subcommand("clue", "Encode a DoA clue");
  c_clue->add_option("--az", cl.az, "Azimuth in degrees")->required();
  c_clue->add_option("--el", cl.el, "Elevation above the horizon in degrees")->required();
  c_clue->add_option("--order", cl.order, "Spherical-harmonic order N")->check(CLI::Range(0, 32));
  c_clue->add_option("--kind", cl.kind, "sh | cyc-pos")->check(CLI::IsMember({"sh", "cyc-pos"}));
  c_clue->add_option("--dim", cl.dim, "cyc-pos dimension (default 2(N+1)^2)");
  c_clue->add_option("--activation", cl.activation, "JSON file holding an array of frame activations in [0, 1]");
  c_clue->add_option("--frames", cl.frames, "Frames of the time-varying clue")->check(CLI::PositiveNumber);
  c_clue->add_option("--out", cl.out, "Write JSON here instead of stdout");

  FuseCheckArgs fc;
  auto* c_fc = app.add_subcommand("fuse-check", "Finite-difference check of the FiLM fusion gradients");
  c_fc->add_option("--seed", fc.seed, "Seed for weights and inputs");
  c_fc->add_option("--bands", fc.bands, "Number of bands to check")->check(CLI::PositiveNumber);
  c_fc->add_option("--frames", fc.frames, "Frames per band input")->check(CLI::PositiveNumber);

  ExtractArgs ex;
  auto* c_ex = app.add_subcommand("extract", "Delay-and-sum extraction steered at a direction");
  c_ex->add_option("--scene", ex.scene, "Scene directory from simulate")->required();
  c_ex->add_option("--az", ex.az, "Azimuth in degrees")->required();
  c_ex->add_option("--el", ex.el, "Elevation above the horizon in degrees")->required();
  c_ex->add_option("--out", ex.out, "Output WAV")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score an estimate against a scene source");
  c_ev->add_option("--est", ev.est, "Estimate WAV")->required();
  c_ev->add_option("--scene", ev.scene, "Scene directory from simulate")->required();
  c_ev->add_option("--source", ev.source, "Source index")->required();
  c_ev->add_option("--reference", ev.reference, "direct | reverberant")
      ->check(CLI::IsMember({"direct", "reverberant"}));
  c_ev->add_option("--out", ev.out, "Report CSV (default stdout)");

  ContourArgs co;
  auto* c_co = app.add_subcommand("contour", "SI-SNRi over a grid of steering offsets");
  c_co->add_option("--scene", co.scene, "Scene directory from simulate")->required();
  c_co->add_option("--source", co.source, "Source index")->required();
  c_co->add_option("--span", co.span, "Half-width of the grid in degrees");
  c_co->add_option("--step", co.step, "Grid step in degrees");
  c_co->add_option("--reference", co.reference, "direct | reverberant")
      ->check(CLI::IsMember({"direct", "reverberant"}));
  c_co->add_option("--jobs", co.jobs, "Grid points evaluated in parallel")->check(CLI::PositiveNumber);
  c_co->add_option("--out", co.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_feat) return run_featurize(feat);
    if (*c_clue) return run_clue(cl);
    if (*c_fc) {
      if (c_fc->count("--seed") == 0)
        if (const auto s = env_seed()) fc.seed = *s;
      return run_fuse_check(fc);
    }
    if (*c_ex) return run_extract(ex);
    if (*c_ev) return run_evaluate(ev);
    if (*c_co) return run_contour(co);
  } catch (const ExitCode& e) {
    return e.code;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
