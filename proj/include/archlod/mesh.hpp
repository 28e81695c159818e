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

#include "archlod/common.hpp"

namespace archlod {

// Polygonal surface mesh. Faces are CCW vertex loops seen from outside.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
  std::vector<int> face_plane;  // source plane id per face (-1 if none)

  bool empty() const { return faces.empty(); }
};

Vec3 face_normal(const PolyMesh& m, std::size_t f);  // Newell normal, unit
double face_area(const PolyMesh& m, std::size_t f);
double mesh_volume(const PolyMesh& m);
double mesh_area(const PolyMesh& m);

}  // namespace archlod
