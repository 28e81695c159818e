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

#include <map>
#include <string>

#include "archlod/geometry.hpp"
#include "archlod/mesh.hpp"
#include "archlod/segments.hpp"
#include "archlod/synth.hpp"

namespace archlod {

// Distances are divided by the reference bounding-box diagonal.
struct Hausdorff {
  double ref_to_mesh = 0;  // max over reference points of the exact distance to the surface
  double mesh_to_ref = 0;  // max over surface samples of the distance to the nearest point
  double symmetric = 0;
  std::size_t mesh_samples = 0;
};

// Lattice samples on every face. The lattice of a face is anchored in the
// canonical frame of its supporting plane, so two meshes sharing a surface
// region sample it identically.
std::vector<Vec3> lattice_samples(const PolyMesh& mesh, double spacing);
double point_face_distance(const PolyMesh& mesh, std::size_t face, const Vec3& p);

// Spacing is chosen so that a surface with the area of the reference bbox
// receives about `samples` points.
Hausdorff hausdorff(const PointCloud& reference, const PolyMesh& mesh, long samples = 100000,
                    int threads = 1);

struct MeshStats {
  long vertices = 0;   // unique referenced vertices
  long triangles = 0;  // after fan triangulation
  long polygons = 0;
};
MeshStats mesh_stats(const PolyMesh& mesh);

double jaccard(const std::vector<int>& a, const std::vector<int>& b);
// 100 * matched / |reference|, greedy best-first on Jaccard >= 0.5.
double sdr(const std::vector<std::vector<int>>& found, const std::vector<std::vector<int>>& reference,
           double threshold = 0.5);

// Ground-truth plane per detected region, or -1. A match needs the normals
// within `angle_deg` (either orientation), offsets within `offset`, and the
// region's bounds overlapping the inflated ground-truth bounds.
std::vector<int> map_to_truth(const std::vector<PlaneRegion>& regions, const GroundTruth& truth,
                              double angle_deg = 5.0, double offset = 0.25);
// Segments as sets of vertical ground-truth planes, the same convention as
// the ground-truth segments. Empty sets are dropped.
std::vector<std::vector<int>> segment_plane_sets(const std::vector<Segment>& segments,
                                                 const std::vector<int>& mapping, const GroundTruth& truth);
std::vector<std::vector<int>> truth_plane_sets(const GroundTruth& truth);

struct EvalReport {
  double hd_mean = 0, hd_sd = 0;  // over the evaluated meshes
  double vertices = 0, triangles = 0, polygons = 0;  // per-mesh averages
  std::map<std::string, double> runtimes;  // seconds per stage
  double sdr = -1;  // percent, -1 when no reference is available
  long meshes = 0;
};

EvalReport summarize(const std::vector<Hausdorff>& hd, const std::vector<MeshStats>& stats);

}  // namespace archlod
