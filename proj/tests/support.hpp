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

// Analytic shapes shared by the test suites.

#include <cmath>
#include <filesystem>
#include <string>

#include "archlod/geometry.hpp"
#include "archlod/mesh.hpp"

namespace archlod::testing {

// Six outward-facing rectangles of an axis-aligned box.
inline std::vector<PlaneRegion> box_regions(const Vec3& lo, const Vec3& hi) {
  std::vector<PlaneRegion> out;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const int a = (axis + 1) % 3, b = (axis + 2) % 3;
      Vec3 n = Vec3::Zero();
      n[axis] = side ? 1.0 : -1.0;
      const double c = side ? hi[axis] : lo[axis];
      std::vector<Vec3> ring;
      for (const auto& [ua, ub] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}}) {
        Vec3 p;
        p[axis] = c;
        p[a] = ua ? hi[a] : lo[a];
        p[b] = ub ? hi[b] : lo[b];
        ring.push_back(p);
      }
      out.push_back(PlaneRegion::from_polygon(Plane{n, c * n[axis]}, {ring}));
    }
  return out;
}

inline PolyMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  PolyMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
  m.faces = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  m.face_plane.assign(6, -1);
  return m;
}

// Regular lattice on the box surface with outward normals.
inline PointCloud box_cloud(const Vec3& lo, const Vec3& hi, double spacing) {
  PointCloud c;
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const int a = (axis + 1) % 3, b = (axis + 2) % 3;
      const int na = static_cast<int>(std::round((hi[a] - lo[a]) / spacing));
      const int nb = static_cast<int>(std::round((hi[b] - lo[b]) / spacing));
      for (int i = 0; i <= na; ++i)
        for (int j = 0; j <= nb; ++j) {
          Vec3 p, n = Vec3::Zero();
          p[axis] = side ? hi[axis] : lo[axis];
          p[a] = lo[a] + (hi[a] - lo[a]) * i / na;
          p[b] = lo[b] + (hi[b] - lo[b]) * j / nb;
          n[axis] = side ? 1.0 : -1.0;
          c.points.push_back(p);
          c.normals.push_back(n);
        }
    }
  return c;
}

inline std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("archlod_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace archlod::testing
