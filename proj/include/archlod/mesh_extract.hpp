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

#include <algorithm>
#include <optional>
#include <string>

#include "archlod/geometry.hpp"
#include "archlod/mesh.hpp"

namespace archlod {

// A face of a convex cell. `support` indexes Partition::planes; the outward
// normal is side * planes[support].normal. Loops are CCW seen from outside.
struct CellFace {
  int support = 0;
  int side = 1;
  std::vector<int> loop;
};

struct ConvexCell {
  std::vector<CellFace> faces;
  Vec3 centroid = Vec3::Zero();
  double volume = 0;
  bool interior = false;
};

// Arrangement of planes inside a box. planes[0..5] are the box walls with
// outward normals; planes[6 + i] is input plane i.
struct Partition {
  AABB box;
  std::vector<Plane> planes;
  std::vector<Vec3> vertices;
  std::vector<ConvexCell> cells;
  double eps = 0;  // on-plane tolerance used for splitting
};

constexpr int kBoxPlanes = 6;
constexpr std::size_t kMaxCells = 1000000;

// Splits the box by every plane, in order, wherever it crosses a cell.
Partition bsp_partition(const AABB& box, const std::vector<Plane>& planes);

// Indices of planes kept after merging near-duplicates (orientation ignored).
// The first plane of a duplicate group wins.
std::vector<int> dedupe_planes(const std::vector<Plane>& planes, const std::vector<Vec3>& anchors,
                               double angle_deg = 1.0, double offset = 1e-3);

std::vector<Vec3> fibonacci_directions(int n);
int interior_hits(const Vec3& c, const std::vector<PlaneRegion>& regions, const std::vector<Vec3>& dirs);
bool label_cell(const Vec3& c, const std::vector<PlaneRegion>& regions, int n_r);

// Face adjacency: for each cell, its face-neighbors (sorted, unique).
std::vector<std::vector<int>> cell_adjacency(const Partition& part);

// Connected interior component with the largest volume; ties go to the
// component holding the smallest cell id.
std::vector<int> largest_interior_component(const Partition& part, const std::vector<std::vector<int>>& adj);

struct ManifoldReport {
  bool closed = false;           // every edge used once in each direction
  bool vertex_manifold = false;  // one fan of faces around every vertex
  bool no_degenerate = false;    // every face has area
  int components = 0;
  std::vector<int> euler;        // V - E + F per component
  std::string problem;           // first defect found
  Vec3 where = Vec3::Zero();
  bool watertight() const {
    return closed && vertex_manifold && no_degenerate &&
           std::all_of(euler.begin(), euler.end(), [](int e) { return e == 2; });
  }
};

ManifoldReport check_manifold(const PolyMesh& mesh);

// Boundary of a cell set; face_plane holds the support index (0..5 box
// walls). Throws on a non-manifold result.
PolyMesh extract_mesh(const Partition& part, const std::vector<int>& component);

struct MeshParams {
  int n_r = 100;
  int threads = 1;
  double dedupe_angle_deg = 1.0;
  double dedupe_offset = 1e-3;
  double box_margin = 0.02;
  int max_repairs = 200;
};

struct LayerMesh {
  PolyMesh mesh;  // face_plane holds indices into the full region list, -1 for box walls
  std::size_t cells = 0;
  std::size_t interior_cells = 0;
  int repairs = 0;
};

// Mesh for one layer: BSP over the layer planes (descending area), cells
// labeled by rays against all regions, largest interior component
// extracted. Repairs non-manifold junctions by absorbing the smallest
// exterior cell at the defect.
LayerMesh build_layer_mesh(const std::vector<PlaneRegion>& all_regions, const std::vector<int>& layer,
                           const MeshParams& params);

}  // namespace archlod
