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

#include <Eigen/Dense>
#include <string>

#include "archlod/segments.hpp"

namespace archlod {

struct CoParams {
  double beta = 0.3;
  double lambda = 0.4;
  double eta = 4.0;
  double fidelity_floor = 0.8;
  int l_n = 2;
  int d2_bins = 64;
  int d2_pairs = 100000;
  int samples_per_segment = 2000;
  uint64_t seed = 42;
  int max_sweeps = 10;
  int threads = 1;
};

struct SegmentDescriptor {
  std::vector<double> d2;  // L1-normalized
  Vec3 eigenvalues = Vec3::Zero();  // descending, m^2
};

// Whitening in the principal frame. Axes with eigenvalue below 1e-9 of the
// largest are centered but not scaled.
std::vector<Vec3> normalize_segment(const std::vector<Vec3>& pts);
std::vector<double> d2_descriptor(const std::vector<Vec3>& pts, int bins, int pairs, uint64_t seed);
Vec3 principal_eigenvalues(const std::vector<Vec3>& pts);
SegmentDescriptor describe_points(const std::vector<Vec3>& pts, const CoParams& params, uint64_t seed);
// Area-weighted samples over the footprints of the segment's planes.
std::vector<Vec3> sample_segment_surface(const Segment& seg, const std::vector<PlaneRegion>& regions,
                                         int count, uint64_t seed);

double shape_distance(const SegmentDescriptor& a, const SegmentDescriptor& b);
double scale_distance(const SegmentDescriptor& a, const SegmentDescriptor& b);
double segment_distance(const SegmentDescriptor& a, const SegmentDescriptor& b, double eta);
// exp(-min distance); 0 for an empty set.
double cross_similarity(const std::vector<double>& distances_to_set);

// Selection problem over a building collection. Segment ids are global
// indices into `distance`.
struct CoBuilding {
  std::string name;
  std::vector<int> global;      // global id per local segment
  std::vector<double> area;     // plane area per segment
  double total_area = 0;
  std::vector<long> atom_size;  // voxels per distinct covering signature
  std::vector<std::vector<int>> atom_members;
  long total_voxels = 0;
  std::size_t size() const { return global.size(); }
};

CoBuilding make_co_building(const std::string& name, const std::vector<Segment>& segs,
                            const std::vector<PlaneRegion>& regions, int first_global);

struct CollectionContext {
  std::vector<CoBuilding> buildings;
  Eigen::MatrixXd distance;  // symmetric, zero diagonal
  Eigen::MatrixXd similarity() const { return (-distance.array()).exp().matrix(); }
};

using Selection = std::vector<std::vector<char>>;  // keep flags per building

double fidelity_term(const CoBuilding& b, const std::vector<char>& keep);
double simplicity_term(const CoBuilding& b, const std::vector<char>& keep);
double consistency_term(const CollectionContext& ctx, const Selection& sel, std::size_t i);
double energy(const CollectionContext& ctx, const Selection& sel, const CoParams& params);
bool feasible(const CoBuilding& b, const std::vector<char>& keep, double floor);

struct SolverOptions {
  int enumerate_limit = 20;  // exhaustive block search up to this many segments
  bool multi_start = true;
};

Selection optimize_lod0(const CollectionContext& ctx, const CoParams& params, double* e0 = nullptr,
                        const SolverOptions& opts = {});
// Joint enumeration over all buildings; test oracle for small collections.
Selection optimize_exhaustive(const CollectionContext& ctx, const CoParams& params, double* e0 = nullptr);

// Cluster ids 0..k-1 from the normalized Laplacian embedding followed by
// k-means with farthest-point seeding.
std::vector<int> spectral_clusters(const Eigen::MatrixXd& similarity, int k, uint64_t seed);
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& similarity);
// Layers 1..l_n-1 for each segment, larger mean volume first.
std::vector<int> spectral_layers(const Eigen::MatrixXd& similarity, const std::vector<double>& volumes,
                                 int l_n, uint64_t seed, std::string* warning = nullptr);

double point_region_distance(const Vec3& p, const PlaneRegion& r);
double footprint_distance(const PlaneRegion& a, const PlaneRegion& b);
// Planes of segments with layer <= k plus unsegmented planes within eps of
// an included plane.
std::vector<int> layer_planes(const std::vector<Segment>& segs, const std::vector<int>& layers, int k,
                              const std::vector<PlaneRegion>& regions, double eps);

struct CoInput {
  std::string name;
  const std::vector<Segment>* segments;
  const std::vector<PlaneRegion>* regions;
  VoxelGrid grid;
};

struct CoResult {
  Selection lod0;
  std::vector<std::vector<int>> layers;  // per building, per segment
  std::vector<double> fidelity;
  double energy = 0;
  Eigen::MatrixXd similarity;
  std::vector<std::pair<int, int>> global_ids;  // (building, local segment)
  std::vector<std::string> warnings;
};

CoResult coanalyze(const std::vector<CoInput>& inputs, const CoParams& params);

std::string similarity_csv(const CoResult& result, const std::vector<std::string>& building_names);

}  // namespace archlod
