// Copyright 2026 The archlod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "archlod/pipeline.hpp"

#include <algorithm>
#include <cereal/archives/binary.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "archlod/io.hpp"
#include "archlod/parallel.hpp"
#include "archlod/synth.hpp"

namespace Eigen {

template <class Archive, class S, int R, int C, int O, int MR, int MC>
void serialize(Archive& ar, Matrix<S, R, C, O, MR, MC>& m) {
  for (Index i = 0; i < m.size(); ++i) ar(m.data()[i]);
}

}  // namespace Eigen

namespace archlod {

template <class Archive>
void serialize(Archive& ar, Plane& p) {
  ar(p.normal, p.offset);
}
template <class Archive>
void serialize(Archive& ar, PlaneFrame& f) {
  ar(f.origin, f.u, f.v, f.n);
}
template <class Archive>
void serialize(Archive& ar, Box2& b) {
  ar(b.min, b.max);
}
template <class Archive>
void serialize(Archive& ar, AABB& b) {
  ar(b.min, b.max);
}
template <class Archive>
void serialize(Archive& ar, PlaneRegion& r) {
  ar(r.plane, r.frame, r.inliers, r.footprint, r.bounds2d, r.bounds3d, r.area, r.reversed,
     r.orientation_agreement);
}
template <class Archive>
void serialize(Archive& ar, Segment& s) {
  ar(s.planes, s.voxels, s.plane_hits, s.kind, s.centroid, s.covariance);
}
template <class Archive>
void serialize(Archive& ar, VoxelGrid& g) {
  ar(g.box, g.n, g.cell);
}
template <class Archive>
void serialize(Archive& ar, Segmentation& s) {
  ar(s.grid, s.segments, s.alcove_count, s.reversed_planes);
}

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
      throw ConfigError(where + ": unknown key \"" + k + "\"");
}

}  // namespace

uint64_t fnv1a(const std::string& bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void Config::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(vis.n_s >= 2, "n_s must be at least 2");
  need(vis.n_r >= 1, "n_r must be positive");
  need(agg.A_epsilon > 0, "A_epsilon must be positive");
  need(agg.overlap_ratio > 0 && agg.overlap_ratio < 1, "overlap_ratio must lie in (0, 1)");
  need(co.l_n >= 2, "l_n must be at least 2");
  need(co.beta > 0 && co.lambda > 0 && co.eta > 0, "beta, lambda and eta must be positive");
  need(co.fidelity_floor > 0 && co.fidelity_floor < 1, "fidelity floor must lie in (0, 1)");
  need(detect.distance_threshold > 0, "distance_threshold must be positive");
  need(detect.angle_threshold > 0 && detect.angle_threshold <= 90, "angle_threshold must lie in (0, 90]");
  need(detect.min_region_size >= 3, "min_region_size must be at least 3");
  need(mesh.n_r >= 1, "mesh n_r must be positive");
  need(threads >= 1, "threads must be positive");
  need(unit_scale > 0, "unit_scale must be positive");
  need(obj_density > 0, "obj_density must be positive");
  need(hd_samples == 0 || hd_samples >= 10000, "hd_samples must be 0 or at least 10000");
  need(!output_dir.empty(), "output directory must be set");
}

void apply_config_json(Config& cfg, const nlohmann::json& j) {
  try {
    check_keys(j, {"inputs", "output", "cache", "ground_truth", "unit_scale", "obj_density", "hd_samples",
                   "threads", "seed", "detect", "visibility", "segments", "coanalysis", "mesh"},
               "config");
    get_if(j, "inputs", cfg.inputs);
    get_if(j, "output", cfg.output_dir);
    get_if(j, "cache", cfg.cache_dir);
    get_if(j, "ground_truth", cfg.ground_truth);
    get_if(j, "unit_scale", cfg.unit_scale);
    get_if(j, "obj_density", cfg.obj_density);
    get_if(j, "hd_samples", cfg.hd_samples);
    get_if(j, "threads", cfg.threads);
    get_if(j, "seed", cfg.seed);
    if (j.contains("detect")) {
      const auto& d = j["detect"];
      check_keys(d, {"distance_threshold", "angle_threshold", "min_region_size", "alpha", "footprint_margin", "knn"},
                 "detect");
      get_if(d, "distance_threshold", cfg.detect.distance_threshold);
      get_if(d, "angle_threshold", cfg.detect.angle_threshold);
      get_if(d, "min_region_size", cfg.detect.min_region_size);
      get_if(d, "alpha", cfg.detect.alpha);
      get_if(d, "footprint_margin", cfg.detect.footprint_margin);
      get_if(d, "knn", cfg.detect.knn);
    }
    if (j.contains("visibility")) {
      const auto& v = j["visibility"];
      check_keys(v, {"n_s", "n_r"}, "visibility");
      get_if(v, "n_s", cfg.vis.n_s);
      get_if(v, "n_r", cfg.vis.n_r);
    }
    if (j.contains("segments")) {
      const auto& s = j["segments"];
      check_keys(s, {"A_epsilon", "overlap_ratio", "group_floor", "significance", "alcove_dominance"}, "segments");
      get_if(s, "A_epsilon", cfg.agg.A_epsilon);
      get_if(s, "overlap_ratio", cfg.agg.overlap_ratio);
      get_if(s, "group_floor", cfg.agg.group_floor);
      get_if(s, "significance", cfg.agg.significance);
      get_if(s, "alcove_dominance", cfg.agg.alcove_dominance);
    }
    if (j.contains("coanalysis")) {
      const auto& c = j["coanalysis"];
      check_keys(c, {"beta", "lambda", "eta", "fidelity_floor", "l_n", "d2_bins", "d2_pairs", "samples_per_segment",
                     "max_sweeps"},
                 "coanalysis");
      get_if(c, "beta", cfg.co.beta);
      get_if(c, "lambda", cfg.co.lambda);
      get_if(c, "eta", cfg.co.eta);
      get_if(c, "fidelity_floor", cfg.co.fidelity_floor);
      get_if(c, "l_n", cfg.co.l_n);
      get_if(c, "d2_bins", cfg.co.d2_bins);
      get_if(c, "d2_pairs", cfg.co.d2_pairs);
      get_if(c, "samples_per_segment", cfg.co.samples_per_segment);
      get_if(c, "max_sweeps", cfg.co.max_sweeps);
    }
    if (j.contains("mesh")) {
      const auto& m = j["mesh"];
      check_keys(m, {"n_r", "dedupe_angle_deg", "dedupe_offset", "box_margin", "max_repairs"}, "mesh");
      get_if(m, "n_r", cfg.mesh.n_r);
      get_if(m, "dedupe_angle_deg", cfg.mesh.dedupe_angle_deg);
      get_if(m, "dedupe_offset", cfg.mesh.dedupe_offset);
      get_if(m, "box_margin", cfg.mesh.box_margin);
      get_if(m, "max_repairs", cfg.mesh.max_repairs);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

Config load_config_file(const std::string& path, Config base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

ojson config_json(const Config& cfg) {
  ojson j;
  j["inputs"] = cfg.inputs;
  j["output"] = cfg.output_dir;
  j["cache"] = cfg.cache_dir;
  j["ground_truth"] = cfg.ground_truth;
  j["unit_scale"] = cfg.unit_scale;
  j["obj_density"] = cfg.obj_density;
  j["hd_samples"] = cfg.hd_samples;
  j["threads"] = cfg.threads;
  j["seed"] = cfg.seed;
  j["detect"] = {{"distance_threshold", cfg.detect.distance_threshold},
                 {"angle_threshold", cfg.detect.angle_threshold},
                 {"min_region_size", cfg.detect.min_region_size},
                 {"alpha", cfg.detect.alpha},
                 {"footprint_margin", cfg.detect.footprint_margin},
                 {"knn", cfg.detect.knn}};
  j["visibility"] = {{"n_s", cfg.vis.n_s}, {"n_r", cfg.vis.n_r}};
  j["segments"] = {{"A_epsilon", cfg.agg.A_epsilon},
                   {"overlap_ratio", cfg.agg.overlap_ratio},
                   {"group_floor", cfg.agg.group_floor},
                   {"significance", cfg.agg.significance},
                   {"alcove_dominance", cfg.agg.alcove_dominance}};
  j["coanalysis"] = {{"beta", cfg.co.beta},
                     {"lambda", cfg.co.lambda},
                     {"eta", cfg.co.eta},
                     {"fidelity_floor", cfg.co.fidelity_floor},
                     {"l_n", cfg.co.l_n},
                     {"d2_bins", cfg.co.d2_bins},
                     {"d2_pairs", cfg.co.d2_pairs},
                     {"samples_per_segment", cfg.co.samples_per_segment},
                     {"max_sweeps", cfg.co.max_sweeps}};
  j["mesh"] = {{"n_r", cfg.mesh.n_r},
               {"dedupe_angle_deg", cfg.mesh.dedupe_angle_deg},
               {"dedupe_offset", cfg.mesh.dedupe_offset},
               {"box_margin", cfg.mesh.box_margin},
               {"max_repairs", cfg.mesh.max_repairs}};
  return j;
}

std::vector<std::string> collect_inputs(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const auto ext = lower_ext(e.path());
        if (ext == ".ply" || ext == ".obj") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      out.push_back(p);
    } else {
      throw ConfigError(p + ": no such file or directory");
    }
  }
  return out;
}

namespace {

struct Stage1 {
  std::vector<PlaneRegion> regions;
  Segmentation seg;
};

// Everything that influences planes and segments, threads excluded.
std::string stage1_key(const std::string& bytes, const Config& cfg) {
  const ojson full = config_json(cfg);
  ojson k;
  k["unit_scale"] = full["unit_scale"];
  k["obj_density"] = full["obj_density"];
  k["detect"] = full["detect"];
  k["visibility"] = full["visibility"];
  k["segments"] = full["segments"];
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(k.dump(), fnv1a(bytes))));
  return hex;
}

bool load_cache(const std::string& path, Stage1& s) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  try {
    cereal::BinaryInputArchive ar(in);
    std::string magic;
    ar(magic);
    if (magic != "archlod-stage1-v1") return false;
    ar(s.regions, s.seg);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void save_cache(const std::string& path, const Stage1& s) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    cereal::BinaryOutputArchive ar(out);
    ar(std::string("archlod-stage1-v1"), s.regions, s.seg);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
}

std::vector<std::string> truth_candidates(const Config& cfg) {
  if (!cfg.ground_truth.empty()) return {cfg.ground_truth};
  std::vector<std::string> out;
  for (const auto& p : cfg.inputs) {
    std::error_code ec;
    const fs::path dir = fs::is_directory(p, ec) ? fs::path(p) : fs::path(p).parent_path();
    const auto gt = dir / "ground_truth.json";
    if (fs::exists(gt, ec)) out.push_back(gt.string());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

int RunReport::succeeded() const {
  return static_cast<int>(std::count_if(buildings.begin(), buildings.end(), [](const auto& b) { return b.ok; }));
}

RunReport run(const Config& cfg) {
  cfg.validate();
  const auto t_run = std::chrono::steady_clock::now();
  RunReport rep;
  const auto files = collect_inputs(cfg.inputs);
  if (files.empty()) {
    rep.warnings.push_back("no input buildings found");
    return rep;
  }
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError(cfg.output_dir + ": " + ec.message());
  if (!cfg.cache_dir.empty()) {
    fs::create_directories(cfg.cache_dir, ec);
    if (ec) throw ConfigError(cfg.cache_dir + ": " + ec.message());
  }

  std::vector<TruthFile> truths;
  for (const auto& path : truth_candidates(cfg)) {
    try {
      truths.push_back(parse_ground_truth(read_file(path)));
    } catch (const Error& e) {
      if (!cfg.ground_truth.empty()) throw ConfigError(e.what());
      rep.warnings.push_back(e.what());
    }
  }

  const std::size_t nb = files.size();
  rep.buildings.resize(nb);
  std::vector<Stage1> stage(nb);
  std::vector<PointCloud> clouds(nb);
  const int outer = static_cast<int>(std::min<std::size_t>(nb, static_cast<std::size_t>(cfg.threads)));
  const int inner = std::max(1, cfg.threads / std::max(1, outer));

  // Stage 1: planes and segments, independent per building.
  parallel_for(nb, outer, [&](std::size_t i) {
    BuildingResult& b = rep.buildings[i];
    b.input = files[i];
    b.name = fs::path(files[i]).stem().string();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const std::string bytes = read_file(files[i]);
      clouds[i] = ingest(files[i], cfg.unit_scale, cfg.obj_density);
      b.points = static_cast<long>(clouds[i].size());
      std::string cache_path;
      if (!cfg.cache_dir.empty())
        cache_path = (fs::path(cfg.cache_dir) / (b.name + "-" + stage1_key(bytes, cfg) + ".bin")).string();
      if (!cache_path.empty() && load_cache(cache_path, stage[i])) {
        b.cached = true;
      } else {
        DetectParams dp = cfg.detect;
        dp.threads = inner;
        stage[i].regions = detect_planes(clouds[i], dp);
        VisParams vp = cfg.vis;
        vp.threads = inner;
        stage[i].seg = generate_segments(stage[i].regions, cfg.agg, vp);
        if (!cache_path.empty()) save_cache(cache_path, stage[i]);
      }
      b.planes = static_cast<int>(stage[i].regions.size());
      b.segments = static_cast<int>(stage[i].seg.segments.size());
      b.alcoves = stage[i].seg.alcove_count;
      b.reversed_planes = stage[i].seg.reversed_planes;
      for (const auto& r : stage[i].regions)
        if (r.orientation_agreement < 0.6)
          b.warnings.push_back("plane with inconsistent normal orientation");
      b.ok = true;
    } catch (const std::exception& e) {
      b.ok = false;
      b.error = e.what();
    }
    b.t_s = seconds_since(t0);
  });

  // Co-analysis is a barrier over every building that survived stage 1.
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < nb; ++i)
    if (rep.buildings[i].ok) alive.push_back(i);
  CoResult co;
  if (!alive.empty()) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CoInput> in;
    for (std::size_t i : alive)
      in.push_back(CoInput{rep.buildings[i].name, &stage[i].seg.segments, &stage[i].regions, stage[i].seg.grid});
    CoParams cp = cfg.co;
    cp.seed = cfg.seed;
    cp.threads = cfg.threads;
    try {
      co = coanalyze(in, cp);
      rep.energy = co.energy;
      rep.warnings.insert(rep.warnings.end(), co.warnings.begin(), co.warnings.end());
      std::vector<std::string> names;
      for (std::size_t i : alive) names.push_back(rep.buildings[i].name);
      std::ofstream(fs::path(cfg.output_dir) / "similarity.csv") << similarity_csv(co, names);
    } catch (const std::exception& e) {
      for (std::size_t i : alive) {
        rep.buildings[i].ok = false;
        rep.buildings[i].error = std::string("co-analysis: ") + e.what();
      }
      alive.clear();
    }
    rep.t_c = seconds_since(t0);
  }

  // Stage 3: per-layer meshes.
  const int outer3 = static_cast<int>(std::min<std::size_t>(std::max<std::size_t>(alive.size(), 1),
                                                             static_cast<std::size_t>(cfg.threads)));
  const int inner3 = std::max(1, cfg.threads / outer3);
  parallel_for(alive.size(), outer3, [&](std::size_t a) {
    const std::size_t i = alive[a];
    BuildingResult& b = rep.buildings[i];
    b.t_c = rep.t_c;
    b.lod0 = co.lod0[a];
    b.layers = co.layers[a];
    b.fidelity = co.fidelity[a];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto& regions = stage[i].regions;
      const auto& segs = stage[i].seg.segments;
      std::vector<std::pair<LayerResult, PolyMesh>> out;
      MeshParams mp = cfg.mesh;
      mp.threads = inner3;
      for (int k = 0; k < cfg.co.l_n; ++k) {
        const auto planes = layer_planes(segs, b.layers, k, regions, stage[i].seg.grid.max_edge());
        LayerMesh lm = build_layer_mesh(regions, planes, mp);
        LayerResult lr;
        lr.layer = k;
        lr.file = b.name + "_lod" + std::to_string(k) + ".obj";
        lr.planes = static_cast<int>(planes.size());
        lr.stats = mesh_stats(lm.mesh);
        lr.watertight = check_manifold(lm.mesh).watertight();
        lr.repairs = lm.repairs;
        if (!lr.watertight) throw Error("layer " + std::to_string(k) + " mesh is not watertight");
        if (cfg.hd_samples > 0) {
          lr.hd = hausdorff(clouds[i], lm.mesh, cfg.hd_samples, inner3);
          lr.has_hd = true;
        }
        out.emplace_back(std::move(lr), std::move(lm.mesh));
      }
      for (auto& [lr, mesh] : out) {
        write_obj((fs::path(cfg.output_dir) / lr.file).string(), mesh);
        b.meshes.push_back(lr);
      }
      for (const auto& t : truths)
        if (const GroundTruth* gt = t.find(b.name); gt && !gt->segments.empty()) {
          const auto mapping = map_to_truth(regions, *gt);
          b.sdr = sdr(segment_plane_sets(segs, mapping, *gt), truth_plane_sets(*gt));
          break;
        }
    } catch (const std::exception& e) {
      b.ok = false;
      b.error = e.what();
      b.meshes.clear();
    }
    b.t_p = seconds_since(t0);
  });

  for (const auto& b : rep.buildings)
    if (!b.ok) rep.warnings.push_back(b.name + ": " + b.error);
  rep.total = seconds_since(t_run);
  return rep;
}

ojson report_json(const RunReport& rep, const Config& cfg) {
  ojson j;
  j["tool"] = "archlod";
  j["config"] = config_json(cfg);
  j["cell_labeling"] = "rays against all detected planes";
  j["buildings"] = ojson::array();
  double t_s = 0, t_p = 0;
  int max_layer = 0;
  for (const auto& b : rep.buildings) {
    ojson jb;
    jb["name"] = b.name;
    jb["input"] = b.input;
    jb["status"] = b.ok ? "ok" : "failed";
    if (!b.ok) jb["error"] = b.error;
    jb["points"] = b.points;
    jb["planes"] = b.planes;
    jb["segments"] = b.segments;
    jb["alcoves"] = b.alcoves;
    jb["reversed_planes"] = b.reversed_planes;
    std::vector<bool> lod0(b.lod0.begin(), b.lod0.end());
    jb["lod0_keep"] = lod0;
    jb["layers"] = b.layers;
    jb["fidelity"] = b.fidelity;
    if (b.sdr >= 0) jb["sdr"] = b.sdr;
    jb["meshes"] = ojson::array();
    for (const auto& m : b.meshes) {
      ojson jm = {{"layer", m.layer},  {"file", m.file},          {"planes", m.planes},
                  {"vertices", m.stats.vertices}, {"triangles", m.stats.triangles},
                  {"polygons", m.stats.polygons}, {"watertight", m.watertight}, {"repairs", m.repairs}};
      if (m.has_hd)
        jm["hd"] = {{"ref_to_mesh", m.hd.ref_to_mesh}, {"mesh_to_ref", m.hd.mesh_to_ref}, {"symmetric", m.hd.symmetric}};
      jb["meshes"].push_back(jm);
      max_layer = std::max(max_layer, m.layer + 1);
    }
    jb["warnings"] = b.warnings;
    jb["timings"] = {{"T_s", b.t_s}, {"T_c", b.t_c}, {"T_p", b.t_p}};
    t_s += b.t_s;
    t_p += b.t_p;
    j["buildings"].push_back(jb);
  }
  ojson s;
  s["buildings"] = rep.buildings.size();
  s["succeeded"] = rep.succeeded();
  s["failed"] = static_cast<int>(rep.buildings.size()) - rep.succeeded();
  s["energy"] = rep.energy;
  s["layers"] = ojson::array();
  for (int k = 0; k < max_layer; ++k) {
    std::vector<Hausdorff> hd;
    std::vector<MeshStats> st;
    for (const auto& b : rep.buildings)
      for (const auto& m : b.meshes)
        if (m.layer == k) {
          st.push_back(m.stats);
          if (m.has_hd) hd.push_back(m.hd);
        }
    const EvalReport e = summarize(hd, st);
    ojson jl = {{"layer", k},          {"meshes", e.meshes},       {"vertices", e.vertices},
                {"triangles", e.triangles}, {"polygons", e.polygons}};
    if (!hd.empty()) {
      jl["hd_mean"] = e.hd_mean;
      jl["hd_sd"] = e.hd_sd;
    }
    s["layers"].push_back(jl);
  }
  double sdr_sum = 0;
  int sdr_n = 0;
  for (const auto& b : rep.buildings)
    if (b.sdr >= 0) sdr_sum += b.sdr, ++sdr_n;
  if (sdr_n > 0) s["sdr"] = sdr_sum / sdr_n;
  j["summary"] = s;
  j["warnings"] = rep.warnings;
  j["timings"] = {{"T_s", t_s}, {"T_c", rep.t_c}, {"T_p", t_p}, {"total", rep.total}};
  return j;
}

ojson strip_timings(ojson j) {
  if (j.is_object()) {
    j.erase("timings");
    for (auto& [k, v] : j.items()) v = strip_timings(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = strip_timings(v);
  }
  return j;
}

ojson evaluate_outputs(const std::vector<std::string>& inputs, const std::string& output_dir, long hd_samples,
                       int threads, double unit_scale) {
  ojson j;
  j["buildings"] = ojson::array();
  std::vector<std::vector<Hausdorff>> hd;
  std::vector<std::vector<MeshStats>> st;
  for (const auto& file : collect_inputs(inputs)) {
    ojson jb;
    const std::string stem = fs::path(file).stem().string();
    jb["name"] = stem;
    jb["meshes"] = ojson::array();
    try {
      const PointCloud cloud = ingest(file, unit_scale);
      for (int k = 0;; ++k) {
        const fs::path obj = fs::path(output_dir) / (stem + "_lod" + std::to_string(k) + ".obj");
        if (!fs::exists(obj)) break;
        const PolyMesh mesh = read_obj(obj.string());
        const MeshStats s = mesh_stats(mesh);
        const ManifoldReport mr = check_manifold(mesh);
        ojson jm = {{"layer", k},         {"file", obj.filename().string()}, {"vertices", s.vertices},
                    {"triangles", s.triangles}, {"polygons", s.polygons},      {"watertight", mr.watertight()}};
        if (static_cast<int>(st.size()) <= k) st.resize(k + 1), hd.resize(k + 1);
        st[k].push_back(s);
        if (hd_samples > 0) {
          const Hausdorff h = hausdorff(cloud, mesh, hd_samples, threads);
          jm["hd"] = {{"ref_to_mesh", h.ref_to_mesh}, {"mesh_to_ref", h.mesh_to_ref}, {"symmetric", h.symmetric}};
          hd[k].push_back(h);
        }
        jb["meshes"].push_back(jm);
      }
      jb["status"] = "ok";
    } catch (const std::exception& e) {
      jb["status"] = "failed";
      jb["error"] = e.what();
    }
    j["buildings"].push_back(jb);
  }
  j["layers"] = ojson::array();
  for (std::size_t k = 0; k < st.size(); ++k) {
    const EvalReport e = summarize(hd[k], st[k]);
    ojson jl = {{"layer", k},          {"meshes", e.meshes},       {"vertices", e.vertices},
                {"triangles", e.triangles}, {"polygons", e.polygons}};
    if (!hd[k].empty()) {
      jl["hd_mean"] = e.hd_mean;
      jl["hd_sd"] = e.hd_sd;
    }
    j["layers"].push_back(jl);
  }
  return j;
}

}  // namespace archlod
