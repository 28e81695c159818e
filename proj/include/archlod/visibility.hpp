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

#include <array>
#include <span>

#include "archlod/geometry.hpp"

namespace archlod {

struct VisParams {
  int n_s = 150;  // grid resolution per axis
  int n_r = 100;  // horizontal rays per voxel
  int threads = 1;
  bool brute_force = false;  // reference path: every ray against every region
};

struct VoxelGrid {
  AABB box;
  int n = 0;
  Vec3 cell = Vec3::Zero();

  static VoxelGrid over(const AABB& box, int n);
  uint32_t id(int ix, int iy, int iz) const {
    return static_cast<uint32_t>(ix + n * (iy + n * iz));
  }
  std::array<int, 3> coords(uint32_t id) const {
    const int ix = static_cast<int>(id % n);
    const int iy = static_cast<int>((id / n) % n);
    const int iz = static_cast<int>(id / (static_cast<uint32_t>(n) * n));
    return {ix, iy, iz};
  }
  Vec3 centroid(int ix, int iy, int iz) const {
    return {box.min.x() + (ix + 0.5) * cell.x(), box.min.y() + (iy + 0.5) * cell.y(),
            box.min.z() + (iz + 0.5) * cell.z()};
  }
  Vec3 centroid(uint32_t id) const {
    const auto c = coords(id);
    return centroid(c[0], c[1], c[2]);
  }
  double max_edge() const { return cell.maxCoeff(); }
  double voxel_volume() const { return cell.prod(); }
};

// Grid over the regions' bounding box inflated by 2% per side.
VoxelGrid make_grid(const std::vector<PlaneRegion>& regions, int n_s);

struct HitEntry {
  uint16_t plane = 0;
  uint16_t count = 0;
  bool operator==(const HitEntry&) const = default;
};

// Sparse voxel visibility: hit lists for valid voxels only, in ascending
// voxel id order (compressed rows).
struct VoxelField {
  VoxelGrid grid;
  int n_p = 0;
  int n_r = 0;
  std::vector<uint32_t> voxels;
  std::vector<uint32_t> offsets{0};
  std::vector<HitEntry> entries;

  std::size_t size() const { return voxels.size(); }
  std::span<const HitEntry> hits(std::size_t k) const {
    return {entries.data() + offsets[k], entries.data() + offsets[k + 1]};
  }
  // Position of a voxel id in `voxels`, or -1 when not valid.
  long find(uint32_t voxel) const;
  std::vector<int> dense_hitlist(std::size_t k) const;
  bool operator==(const VoxelField& o) const {
    return voxels == o.voxels && offsets == o.offsets && entries == o.entries && n_p == o.n_p;
  }
};

struct PlaneGroup {
  std::vector<int> planes;
  std::vector<uint32_t> voxels;
};

std::vector<Vec3> ray_directions(int n_r);
std::vector<Ray> emit_rays(const Vec3& centroid, int n_r);

// Per-plane counts of rays whose first hit has the centroid strictly on the
// interior side (signed distance < -1e-7).
std::vector<int> compute_hitlist(const Vec3& centroid, const std::vector<Ray>& rays,
                                 const std::vector<PlaneRegion>& regions);

inline bool validate_voxel(int total_hits, int n_r) { return 2 * total_hits >= n_r; }

VoxelField build_field(const std::vector<PlaneRegion>& regions, const VoxelGrid& grid,
                       const VisParams& params);

// One group per distinct plane set over valid voxels, ordered by first voxel.
// A plane joins a voxel's set when at least min_hits rays see it (the most
// seen planes are used if none qualifies).
std::vector<PlaneGroup> form_plane_groups(const VoxelField& field, int min_hits = 1);

}  // namespace archlod
