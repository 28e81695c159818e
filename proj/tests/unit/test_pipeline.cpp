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

#include <gtest/gtest.h>

#include <cstdlib>
#include <functional>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support.hpp"
#include "archlod/pipeline.hpp"
#include "archlod/synth.hpp"

using namespace archlod;
using archlod::testing::temp_dir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two copies of the rooftop box, small enough for quick end-to-end runs.
const std::string& scene_dir() {
  static const std::string dir = [] {
    const std::string d = temp_dir("pipeline_scene");
    SceneSpec spec = fixture("rooftop-box");
    spec.buildings.push_back(spec.buildings[0]);
    spec.buildings[0].name = "roof_a";
    spec.buildings[1].name = "roof_b";
    spec.density = 15;
    write_scene(generate(spec), d);
    return d;
  }();
  return dir;
}

Config quick(const std::string& out) {
  Config c;
  c.inputs = {scene_dir()};
  c.output_dir = out;
  c.vis.n_s = 40;
  c.hd_samples = 10000;
  return c;
}

nlohmann::ordered_json run_and_report(const Config& cfg) {
  const RunReport rep = run(cfg);
  return strip_timings(report_json(rep, cfg));
}

int cli(const std::string& args) {
  const int rc = std::system((std::string(ARCHLOD_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, UnknownKeysRejected) {
  Config c;
  EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"visibilty": {"n_s": 10}})")), ConfigError);
  EXPECT_THROW(apply_config_json(c, nlohmann::json::parse(R"({"visibility": {"n_z": 10}})")), ConfigError);
  EXPECT_NO_THROW(apply_config_json(c, nlohmann::json::parse(R"({"visibility": {"n_s": 10}})")));
  EXPECT_EQ(c.vis.n_s, 10);
}

TEST(Config, FileOverridesDefaultsAndKeepsTheRest) {
  const std::string d = temp_dir("config_file");
  std::ofstream(d + "/c.json") << R"({"coanalysis": {"beta": 0.5, "l_n": 3}, "threads": 2})";
  const Config c = load_config_file(d + "/c.json");
  EXPECT_DOUBLE_EQ(c.co.beta, 0.5);
  EXPECT_EQ(c.co.l_n, 3);
  EXPECT_EQ(c.threads, 2);
  EXPECT_DOUBLE_EQ(c.co.lambda, CoParams{}.lambda);
  EXPECT_EQ(c.vis.n_s, VisParams{}.n_s);
  EXPECT_THROW(load_config_file(d + "/missing.json"), ConfigError);
  std::ofstream(d + "/bad.json") << "{ not json";
  EXPECT_THROW(load_config_file(d + "/bad.json"), ConfigError);
}

TEST(Config, ValidateRejectsOutOfRange) {
  Config c;
  c.inputs = {"x"};
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(Config&)>>{
           [](Config& k) { k.vis.n_s = 0; }, [](Config& k) { k.co.l_n = 1; },
           [](Config& k) { k.co.fidelity_floor = 1.0; }, [](Config& k) { k.agg.A_epsilon = 0; },
           [](Config& k) { k.co.beta = -1; }, [](Config& k) { k.hd_samples = 500; }}) {
    Config k = c;
    mutate(k);
    EXPECT_THROW(k.validate(), ConfigError);
  }
}

TEST(Inputs, MissingPathIsConfigError) {
  EXPECT_THROW(collect_inputs({"/nonexistent/archlod"}), ConfigError);
}

TEST(Run, EmptyDirectoryHasNoBuildings) {
  Config c = quick(temp_dir("empty_out"));
  c.inputs = {temp_dir("empty_in")};
  const RunReport rep = run(c);
  EXPECT_TRUE(rep.buildings.empty());
  EXPECT_EQ(rep.succeeded(), 0);
}

TEST(Run, WritesMeshesReportAndSdr) {
  const std::string out = temp_dir("run_out");
  const Config c = quick(out);
  const RunReport rep = run(c);
  ASSERT_EQ(rep.buildings.size(), 2u);
  for (const auto& b : rep.buildings) {
    ASSERT_TRUE(b.ok) << b.error;
    EXPECT_GT(b.fidelity, c.co.fidelity_floor);
    EXPECT_DOUBLE_EQ(b.sdr, 100.0);  // ground_truth.json found next to the inputs
    ASSERT_EQ(b.meshes.size(), 2u);
    for (const auto& m : b.meshes) {
      EXPECT_TRUE(m.watertight);
      EXPECT_TRUE(fs::exists(fs::path(out) / m.file));
      EXPECT_TRUE(m.has_hd);
    }
    EXPECT_LE(b.meshes[0].stats.polygons, b.meshes[1].stats.polygons);
  }
  EXPECT_TRUE(fs::exists(fs::path(out) / "similarity.csv"));
}

TEST(Run, CorruptInputIsIsolated) {
  const std::string in = temp_dir("corrupt_in");
  fs::copy_file(fs::path(scene_dir()) / "roof_a.ply", fs::path(in) / "roof_a.ply");
  std::ofstream(in + "/broken.ply") << "ply\nformat ascii 1.0\nelement vertex 5\nend_header\n1 2\n";
  Config c = quick(temp_dir("corrupt_out"));
  c.inputs = {in};
  const RunReport rep = run(c);
  ASSERT_EQ(rep.buildings.size(), 2u);
  int ok = 0;
  for (const auto& b : rep.buildings) {
    if (b.name == "broken") {
      EXPECT_FALSE(b.ok);
      EXPECT_FALSE(b.error.empty());
    } else {
      EXPECT_TRUE(b.ok) << b.error;
    }
    ok += b.ok;
  }
  EXPECT_EQ(ok, 1);
  EXPECT_FALSE(fs::exists(fs::path(c.output_dir) / "broken_lod0.obj"));
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  const std::string a = temp_dir("threads_1"), b = temp_dir("threads_4");
  Config ca = quick(a), cb = quick(b);
  cb.threads = 4;
  auto ja = run_and_report(ca), jb = run_and_report(cb);
  ja["config"].erase("output");
  jb["config"].erase("output");
  ja["config"].erase("threads");
  jb["config"].erase("threads");
  EXPECT_EQ(ja.dump(), jb.dump());
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() == ".obj") {
      EXPECT_EQ(slurp(e.path()), slurp(fs::path(b) / e.path().filename()));
    }
}

TEST(Run, CacheReusesFirstStages) {
  const std::string cache = temp_dir("cache");
  const std::string a = temp_dir("cache_run1"), b = temp_dir("cache_run2");
  Config ca = quick(a), cb = quick(b);
  ca.cache_dir = cb.cache_dir = cache;
  const RunReport r1 = run(ca);
  const RunReport r2 = run(cb);
  for (const auto& bld : r1.buildings) EXPECT_FALSE(bld.cached);
  for (const auto& bld : r2.buildings) EXPECT_TRUE(bld.cached);
  auto j1 = strip_timings(report_json(r1, ca)), j2 = strip_timings(report_json(r2, cb));
  j1["config"].erase("output");
  j2["config"].erase("output");
  for (auto& jb : j1["buildings"]) jb.erase("cached");
  for (auto& jb : j2["buildings"]) jb.erase("cached");
  EXPECT_EQ(j1.dump(), j2.dump());
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() == ".obj") {
      EXPECT_EQ(slurp(e.path()), slurp(fs::path(b) / e.path().filename()));
    }

  // A parameter that feeds the cached stages gives a new key.
  Config cc = quick(temp_dir("cache_run3"));
  cc.cache_dir = cache;
  cc.vis.n_s = 36;
  for (const auto& bld : run(cc).buildings) EXPECT_FALSE(bld.cached);
}

TEST(Eval, ReproducesReportedMetrics) {
  const std::string out = temp_dir("eval_out");
  const Config c = quick(out);
  const RunReport rep = run(c);
  const auto j = evaluate_outputs({scene_dir()}, out, c.hd_samples, 1);
  ASSERT_EQ(j["buildings"].size(), rep.buildings.size());
  for (std::size_t i = 0; i < rep.buildings.size(); ++i) {
    const auto& jb = j["buildings"][i];
    const auto& b = rep.buildings[i];
    ASSERT_EQ(jb["meshes"].size(), b.meshes.size());
    for (std::size_t k = 0; k < b.meshes.size(); ++k) {
      EXPECT_EQ(jb["meshes"][k]["polygons"].get<long>(), b.meshes[k].stats.polygons);
      EXPECT_TRUE(jb["meshes"][k]["watertight"].get<bool>());
      EXPECT_NEAR(jb["meshes"][k]["hd"]["symmetric"].get<double>(), b.meshes[k].hd.symmetric, 1e-6);
    }
  }
}

TEST(Cli, ExitCodes) {
  const std::string empty = temp_dir("cli_empty");
  EXPECT_EQ(cli("run " + scene_dir() + " -o " + temp_dir("cli_ok") + " --n-s 40 --hd-samples 0"), 0);
  EXPECT_EQ(cli("run " + empty + " -o " + temp_dir("cli_none")), 1);
  EXPECT_EQ(cli("run " + scene_dir() + " --no-such-flag"), 2);
  EXPECT_EQ(cli("run /nonexistent/archlod"), 2);
  EXPECT_EQ(cli("run " + scene_dir() + " --n-s 0"), 2);
  EXPECT_EQ(cli("synth no-such-fixture"), 2);
  const std::string bad = temp_dir("cli_badcfg");
  std::ofstream(bad + "/c.json") << R"({"mystery": 1})";
  EXPECT_EQ(cli("run " + scene_dir() + " --config " + bad + "/c.json"), 2);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const std::string d = temp_dir("cli_precedence");
  std::ofstream(d + "/c.json") << R"({"visibility": {"n_s": 44}, "coanalysis": {"beta": 0.35}, "hd_samples": 0})";
  ASSERT_EQ(cli("run " + scene_dir() + " --config " + d + "/c.json --n-s 40 -o " + d + "/out"), 0);
  const auto j = nlohmann::json::parse(slurp(fs::path(d) / "out" / "report.json"));
  EXPECT_EQ(j["config"]["visibility"]["n_s"].get<int>(), 40);
  EXPECT_DOUBLE_EQ(j["config"]["coanalysis"]["beta"].get<double>(), 0.35);
  EXPECT_DOUBLE_EQ(j["config"]["coanalysis"]["lambda"].get<double>(), CoParams{}.lambda);
  EXPECT_EQ(j["cell_labeling"].get<std::string>(), "rays against all detected planes");
}
