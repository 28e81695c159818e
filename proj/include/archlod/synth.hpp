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
#include <utility>

#include "archlod/geometry.hpp"

namespace archlod {

struct Box3 {
  Vec3 min, max;
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool contains_open(const Vec3& p) const {
    return (p.array() > min.array()).all() && (p.array() < max.array()).all();
  }
};

// A named sub-structure; its vertical faces form a ground-truth segment.
struct PartSpec {
  std::string name;
  std::string kind;        // main | rooftop | penthouse | unit | wing | alcove
  std::string repeat_key;  // parts sharing a key across buildings are repetitive
  int box = 0;             // index into solids, or cavities when kind == alcove
  int expected_layer = 0;  // -1 when the part is not a segment of its own
};

struct PartyWall {
  Vec3 min, max;  // axis-aligned rectangle (one zero extent)
  Vec3 normal;
};

struct BuildingSpec {
  std::string name;
  std::vector<Box3> solids;
  std::vector<Box3> cavities;
  std::vector<PartyWall> party_walls;
  std::vector<PartSpec> parts;
  Vec3 translation = Vec3::Zero();
  double rotation_z = 0.0;  // radians
};

struct SceneSpec {
  std::string name;
  std::vector<BuildingSpec> buildings;
  double noise_sigma = 0.0;
  double density = 30.0;  // points per m^2
  uint64_t seed = 1;
  int l_n = 2;
};

struct GtPlane {
  Vec3 normal;
  double offset = 0;
  AABB bounds;  // of the noiseless surface samples
  double area = 0;
  std::vector<int> parts;
};

struct GtSegment {
  std::string name;
  std::string kind;
  std::vector<int> planes;  // vertical ground-truth planes
  bool repetitive = false;
  int expected_layer = 0;
};

struct GroundTruth {
  std::vector<GtPlane> planes;
  std::vector<GtSegment> segments;
};

struct SynthBuilding {
  std::string name;
  PointCloud cloud;
  GroundTruth truth;
};

struct Scene {
  std::string name;
  int l_n = 2;
  std::vector<SynthBuilding> buildings;
};

Scene generate(const SceneSpec& spec, int threads = 1);

// Named fixtures: cube, box, rooftop-box, alcove-box, duplex, twin-towers,
// alcove-row, mixed-campus.
SceneSpec fixture(const std::string& name);
std::vector<std::string> fixture_names();

// Writes <dir>/<building>.ply for each building and <dir>/ground_truth.json.
void write_scene(const Scene& scene, const std::string& dir);
std::string ground_truth_json(const Scene& scene);

struct TruthFile {
  std::string scene;
  int l_n = 2;
  std::vector<std::pair<std::string, GroundTruth>> buildings;
  const GroundTruth* find(const std::string& name) const;
};
TruthFile parse_ground_truth(const std::string& json_text);

}  // namespace archlod
