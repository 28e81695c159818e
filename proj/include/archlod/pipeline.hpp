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

#pragma once

#include <string>

#include "archlod/coanalysis.hpp"
#include "archlod/mesh_extract.hpp"
#include "archlod/metrics.hpp"
#include "archlod/plane_detect.hpp"
#include "archlod/segments.hpp"
#include "json.hpp"

namespace archlod {

// Invalid parameters or paths; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Config {
  std::vector<std::string> inputs;  // files or directories of .ply/.obj
  std::string output_dir = "archlod_out";
  std::string cache_dir;     // empty disables the stage cache
  std::string ground_truth;  // optional; enables SDR
  double unit_scale = 1.0;
  double obj_density = 100.0;  // points per m^2 when sampling OBJ input
  long hd_samples = 100000;    // 0 skips Hausdorff evaluation
  int threads = 1;
  uint64_t seed = 42;

  DetectParams detect;
  VisParams vis;
  AggParams agg;
  CoParams co;
  MeshParams mesh;

  void validate() const;  // throws ConfigError
};

// Merges recognised keys of `j` into `cfg`; unknown keys are rejected.
void apply_config_json(Config& cfg, const nlohmann::json& j);
Config load_config_file(const std::string& path, Config base = {});
nlohmann::ordered_json config_json(const Config& cfg);

struct LayerResult {
  int layer = 0;
  std::string file;
  int planes = 0;
  MeshStats stats;
  bool watertight = false;
  int repairs = 0;
  bool has_hd = false;
  Hausdorff hd;
};

struct BuildingResult {
  std::string name;
  std::string input;
  bool ok = false;
  std::string error;
  bool cached = false;
  long points = 0;
  int planes = 0;
  int segments = 0;
  int alcoves = 0;
  int reversed_planes = 0;
  std::vector<char> lod0;
  std::vector<int> layers;
  double fidelity = 0;
  double sdr = -1;
  std::vector<LayerResult> meshes;
  std::vector<std::string> warnings;
  double t_s = 0, t_c = 0, t_p = 0;  // seconds
};

struct RunReport {
  std::vector<BuildingResult> buildings;
  std::vector<std::string> warnings;
  double energy = 0;
  double t_c = 0, total = 0;
  int succeeded() const;
};

std::vector<std::string> collect_inputs(const std::vector<std::string>& paths);
RunReport run(const Config& cfg);
nlohmann::ordered_json report_json(const RunReport& report, const Config& cfg);
// Removes every "timings" member, recursively.
nlohmann::ordered_json strip_timings(nlohmann::ordered_json j);

// Metrics for existing `<stem>_lod<k>.obj` files against `<stem>` inputs.
nlohmann::ordered_json evaluate_outputs(const std::vector<std::string>& inputs, const std::string& output_dir,
                                        long hd_samples, int threads, double unit_scale = 1.0);

uint64_t fnv1a(const std::string& bytes, uint64_t h = 1469598103934665603ULL);

}  // namespace archlod
