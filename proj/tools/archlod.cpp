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

// archlod run|synth|eval. Exit codes: 0 success, 1 every building failed,
// 2 bad configuration.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "archlod/pipeline.hpp"
#include "archlod/synth.hpp"

namespace fs = std::filesystem;
using namespace archlod;

namespace {

template <class T>
void set_if(const std::optional<T>& v, T& out) {
  if (v) out = *v;
}

struct RunFlags {
  std::vector<std::string> inputs;
  std::string config;
  std::optional<std::string> output, cache, ground_truth;
  std::optional<int> threads, l_n, n_s, n_r, min_region_size, mesh_n_r;
  std::optional<uint64_t> seed;
  std::optional<long> hd_samples;
  std::optional<double> a_epsilon, beta, lambda, eta, fidelity_floor, distance_threshold, angle_threshold, alpha,
      unit_scale, obj_density;
};

int do_run(const RunFlags& f) {
  Config cfg;
  if (!f.config.empty()) cfg = load_config_file(f.config, cfg);
  // Flags are applied last so they win over the config file.
  if (!f.inputs.empty()) cfg.inputs = f.inputs;
  set_if(f.output, cfg.output_dir);
  set_if(f.cache, cfg.cache_dir);
  set_if(f.ground_truth, cfg.ground_truth);
  set_if(f.threads, cfg.threads);
  set_if(f.seed, cfg.seed);
  set_if(f.l_n, cfg.co.l_n);
  set_if(f.n_s, cfg.vis.n_s);
  set_if(f.n_r, cfg.vis.n_r);
  set_if(f.mesh_n_r, cfg.mesh.n_r);
  set_if(f.min_region_size, cfg.detect.min_region_size);
  set_if(f.hd_samples, cfg.hd_samples);
  set_if(f.a_epsilon, cfg.agg.A_epsilon);
  set_if(f.beta, cfg.co.beta);
  set_if(f.lambda, cfg.co.lambda);
  set_if(f.eta, cfg.co.eta);
  set_if(f.fidelity_floor, cfg.co.fidelity_floor);
  set_if(f.distance_threshold, cfg.detect.distance_threshold);
  set_if(f.angle_threshold, cfg.detect.angle_threshold);
  set_if(f.alpha, cfg.detect.alpha);
  set_if(f.unit_scale, cfg.unit_scale);
  set_if(f.obj_density, cfg.obj_density);
  if (cfg.inputs.empty()) throw ConfigError("no inputs given");
  cfg.validate();

  const RunReport rep = run(cfg);
  fs::create_directories(cfg.output_dir);
  const fs::path report_path = fs::path(cfg.output_dir) / "report.json";
  std::ofstream(report_path) << report_json(rep, cfg).dump(2) << "\n";
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << rep.succeeded() << "/" << rep.buildings.size() << " buildings processed; report at "
            << report_path.string() << "\n";
  return rep.succeeded() > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-of-detail building models from point clouds"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run_cmd = app.add_subcommand("run", "Reconstruct per-layer meshes for a building collection");
  run_cmd->add_option("inputs", rf.inputs, "PLY/OBJ files or directories");
  run_cmd->add_option("--config", rf.config, "JSON config file (flags override it)");
  run_cmd->add_option("-o,--output", rf.output, "Output directory");
  run_cmd->add_option("--cache", rf.cache, "Stage cache directory");
  run_cmd->add_option("--ground-truth", rf.ground_truth, "ground_truth.json for SDR");
  run_cmd->add_option("-j,--threads", rf.threads, "Thread budget");
  run_cmd->add_option("--seed", rf.seed, "Random seed");
  run_cmd->add_option("--l-n", rf.l_n, "Number of LOD layers");
  run_cmd->add_option("--n-s", rf.n_s, "Voxel grid resolution per axis");
  run_cmd->add_option("--n-r", rf.n_r, "Rays per voxel");
  run_cmd->add_option("--mesh-n-r", rf.mesh_n_r, "Rays per cell for labeling");
  run_cmd->add_option("--a-epsilon", rf.a_epsilon, "Alcove plane area threshold (m^2)");
  run_cmd->add_option("--beta", rf.beta, "Simplicity weight");
  run_cmd->add_option("--lambda", rf.lambda, "Consistency weight");
  run_cmd->add_option("--eta", rf.eta, "Scale distance weight");
  run_cmd->add_option("--fidelity-floor", rf.fidelity_floor, "Minimum LOD0 fidelity");
  run_cmd->add_option("--distance-threshold", rf.distance_threshold, "Plane inlier distance (m)");
  run_cmd->add_option("--angle-threshold", rf.angle_threshold, "Normal deviation for growing (deg)");
  run_cmd->add_option("--min-region-size", rf.min_region_size, "Minimum points per plane");
  run_cmd->add_option("--alpha", rf.alpha, "Alpha-shape radius (m), <= 0 for automatic");
  run_cmd->add_option("--unit-scale", rf.unit_scale, "Scale applied to input coordinates");
  run_cmd->add_option("--obj-density", rf.obj_density, "Sampling density for OBJ input (pts/m^2)");
  run_cmd->add_option("--hd-samples", rf.hd_samples, "Surface samples for Hausdorff, 0 to skip");

  std::string fixture_name, synth_out = "scene";
  std::optional<uint64_t> synth_seed;
  std::optional<double> synth_noise, synth_density;
  int synth_threads = 1;
  bool list = false;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic fixture scene");
  synth_cmd->add_option("fixture", fixture_name, "Fixture name");
  synth_cmd->add_flag("--list", list, "List fixtures");
  synth_cmd->add_option("-o,--output", synth_out, "Output directory");
  synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--noise", synth_noise, "Gaussian noise sigma (m)");
  synth_cmd->add_option("--density", synth_density, "Points per m^2");
  synth_cmd->add_option("-j,--threads", synth_threads, "Threads");

  std::vector<std::string> eval_inputs;
  std::string eval_dir = "archlod_out", eval_report;
  long eval_samples = 100000;
  int eval_threads = 1;
  double eval_scale = 1.0;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate existing meshes against their input clouds");
  eval_cmd->add_option("inputs", eval_inputs, "Input PLY/OBJ files or directories")->required();
  eval_cmd->add_option("-o,--output", eval_dir, "Directory holding <stem>_lod<k>.obj");
  eval_cmd->add_option("--report", eval_report, "Write JSON here instead of stdout");
  eval_cmd->add_option("--hd-samples", eval_samples, "Surface samples for Hausdorff, 0 to skip");
  eval_cmd->add_option("-j,--threads", eval_threads, "Threads");
  eval_cmd->add_option("--unit-scale", eval_scale, "Scale applied to input coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run_cmd) return do_run(rf);
    if (*synth_cmd) {
      if (list) {
        for (const auto& n : fixture_names()) std::cout << n << "\n";
        return 0;
      }
      if (fixture_name.empty()) throw ConfigError("fixture name required (see --list)");
      SceneSpec spec;
      try {
        spec = fixture(fixture_name);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      set_if(synth_seed, spec.seed);
      set_if(synth_noise, spec.noise_sigma);
      set_if(synth_density, spec.density);
      write_scene(generate(spec, synth_threads), synth_out);
      std::cerr << "wrote " << spec.buildings.size() << " buildings to " << synth_out << " (l_n " << spec.l_n
                << ")\n";
      return 0;
    }
    if (*eval_cmd) {
      if (eval_samples != 0 && eval_samples < 10000) throw ConfigError("hd-samples must be 0 or at least 10000");
      const auto j = evaluate_outputs(eval_inputs, eval_dir, eval_samples, eval_threads, eval_scale);
      if (eval_report.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream(eval_report) << j.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
