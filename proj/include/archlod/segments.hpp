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

#include "archlod/visibility.hpp"

namespace archlod {

enum class SegmentKind { Alcove, Closed };

struct Segment {
  std::vector<int> planes;                     // ascending plane ids
  std::vector<uint32_t> voxels;                // ascending voxel ids
  std::vector<std::pair<int, long>> plane_hits;  // valid hits per plane over `voxels`
  SegmentKind kind = SegmentKind::Closed;
  Vec3 centroid = Vec3::Zero();  // of voxel centroids
  Mat3 covariance = Mat3::Zero();

  long hits_on(int plane) const;
};

struct AggParams {
  double A_epsilon = 80.0;  // m^2
  double overlap_ratio = 0.5;
  // Minimum share of a voxel's rays on a plane for plane-group membership.
  double group_floor = 0.05;
  int min_group_hits(int n_r) const;
  // Planes holding less than this share of a group's hits are ignored when
  // intersecting plane sets in the overlap test.
  double significance = 0.01;
  // A segment of the inverted pass is an alcove only if its inverted planes
  // carry at least this share of its hits.
  double alcove_dominance = 0.5;
};

long hsum(const std::vector<int>& planes, const std::vector<uint32_t>& voxels, const VoxelField& field);
bool can_merge(const PlaneGroup& a, const PlaneGroup& b, const VoxelField& field,
               double overlap_ratio = 0.5, double significance = 0.01);

// Pairwise merging of 26-adjacent groups until no pair satisfies the overlap
// condition, highest-scoring pair first. A non-zero shuffle_seed permutes the
// order candidates are queued in, which must not change the result.
std::vector<Segment> aggregate(const std::vector<PlaneGroup>& groups, const VoxelField& field,
                               SegmentKind kind = SegmentKind::Closed, double overlap_ratio = 0.5,
                               uint64_t shuffle_seed = 0, double significance = 0.01);

// Gives each plane to the segment with most valid hits on it (ties to the
// lower index); segments left without planes are dropped.
std::vector<Segment> assign_planes(std::vector<Segment> segments);

struct Segmentation {
  VoxelGrid grid;
  std::vector<Segment> segments;  // alcove segments first
  int alcove_count = 0;
  int reversed_planes = 0;
};

Segmentation generate_segments(const std::vector<PlaneRegion>& regions, const AggParams& params,
                               const VisParams& vis);

void compute_voxel_moments(Segment& s, const VoxelGrid& grid);

}  // namespace archlod
