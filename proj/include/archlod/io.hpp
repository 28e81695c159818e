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

#include "archlod/geometry.hpp"
#include "archlod/mesh.hpp"

namespace archlod {

// PLY (ascii or binary) with x, y, z and nx, ny, nz vertex properties.
PointCloud read_ply(const std::string& path);
void write_ply(const std::string& path, const PointCloud& cloud);

PolyMesh read_obj(const std::string& path);
void write_obj(const std::string& path, const PolyMesh& mesh);

// Area-weighted surface samples with face normals, at `density` points/m^2.
PointCloud sample_mesh(const PolyMesh& mesh, double density, uint64_t seed = 1);

// Loads a PLY or OBJ file as a point cloud scaled by unit_scale.
PointCloud ingest(const std::string& path, double unit_scale = 1.0, double obj_density = 100.0);

}  // namespace archlod
