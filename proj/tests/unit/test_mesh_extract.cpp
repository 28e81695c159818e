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

#include <map>
#include <numbers>
#include <set>

#include "../support.hpp"
#include "archlod/mesh_extract.hpp"

using namespace archlod;
using archlod::testing::box_mesh;
using archlod::testing::box_regions;

namespace {

AABB cube(double lo, double hi) {
  AABB b;
  b.extend(Vec3(lo, lo, lo));
  b.extend(Vec3(hi, hi, hi));
  return b;
}

AABB slab(const Vec3& lo, const Vec3& hi) {
  AABB b;
  b.extend(lo);
  b.extend(hi);
  return b;
}

std::vector<Plane> box_planes(double lo, double hi) {
  std::vector<Plane> out;
  for (int a = 0; a < 3; ++a) {
    const Vec3 e = Vec3::Unit(a);
    out.push_back(Plane{-e, -lo});
    out.push_back(Plane{e, hi});
  }
  return out;
}

double total_volume(const Partition& p) {
  double v = 0;
  for (const auto& c : p.cells) v += c.volume;
  return v;
}

int cell_at(const Partition& p, const Vec3& q) {
  for (std::size_t c = 0; c < p.cells.size(); ++c)
    if ((p.cells[c].centroid - q).norm() < 1e-9) return static_cast<int>(c);
  return -1;
}

int edge_count(const PolyMesh& m) {
  std::set<std::pair<int, int>> e;
  for (const auto& f : m.faces)
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int a = f[i], b = f[(i + 1) % f.size()];
      e.emplace(std::min(a, b), std::max(a, b));
    }
  return static_cast<int>(e.size());
}

}  // namespace

TEST(Bsp, OnePlaneTwoCells) {
  const auto p = bsp_partition(cube(0, 4), {Plane{Vec3(1, 1, 0).normalized(), 2.0}});
  ASSERT_EQ(p.cells.size(), 2u);
  EXPECT_NEAR(total_volume(p), 64.0, 64e-3);
}

TEST(Bsp, MissingPlaneLeavesOneCell) {
  const auto p = bsp_partition(cube(0, 4), {Plane{Vec3::UnitZ(), 9.0}});
  EXPECT_EQ(p.cells.size(), 1u);
  EXPECT_NEAR(p.cells[0].volume, 64.0, 1e-9);
}

TEST(Bsp, InteriorBoxGivesTwentySevenCells) {
  const auto p = bsp_partition(cube(0, 3), box_planes(1, 2));
  ASSERT_EQ(p.cells.size(), 27u);
  EXPECT_NEAR(total_volume(p), 27.0, 27e-3);
  // Every input plane bounds some cell.
  for (int i = 0; i < 6; ++i) {
    bool found = false;
    for (const auto& c : p.cells)
      for (const auto& f : c.faces) found = found || f.support == kBoxPlanes + i;
    EXPECT_TRUE(found) << i;
  }
}

TEST(Bsp, TilesBoxUnderObliquePlanes) {
  std::vector<Plane> planes;
  for (int i = 0; i < 8; ++i) {
    const double t = 0.7 * i;
    planes.push_back(Plane{Vec3(std::cos(t), std::sin(t), 0.3 * (i % 3 - 1)).normalized(), 0.4 * i - 1.0});
  }
  const auto p = bsp_partition(cube(-3, 3), planes);
  EXPECT_NEAR(total_volume(p), 216.0, 216e-3);
  for (const auto& c : p.cells) EXPECT_GT(c.volume, 0.0);
}

TEST(Extract, SingleCellIsBox) {
  const auto p = bsp_partition(cube(0, 2), {Plane{Vec3::UnitX(), 5.0}});
  const auto m = extract_mesh(p, {0});
  EXPECT_EQ(m.faces.size(), 6u);
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_NEAR(mesh_volume(m), 8.0, 1e-9);
  EXPECT_TRUE(check_manifold(m).watertight());
}

TEST(Extract, CenterCellOfArrangementIsUnitBox) {
  const auto p = bsp_partition(cube(0, 3), box_planes(1, 2));
  const int c = cell_at(p, Vec3(1.5, 1.5, 1.5));
  ASSERT_GE(c, 0);
  const auto m = extract_mesh(p, {c});
  EXPECT_EQ(m.faces.size(), 6u);
  EXPECT_EQ(m.vertices.size(), 8u);
  EXPECT_NEAR(mesh_volume(m), 1.0, 1e-9);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    // Outward: normal points away from the center.
    const Vec3 n = face_normal(m, f);
    const Vec3 q = m.vertices[m.faces[f][0]];
    EXPECT_GT(n.dot(q - Vec3(1.5, 1.5, 1.5)), 0.0);
  }
}

TEST(Extract, LShapeMergesCoplanarFaces) {
  const auto p = bsp_partition(slab(Vec3(0, 0, 0), Vec3(2, 2, 1)),
                               {Plane{Vec3::UnitX(), 1.0}, Plane{Vec3::UnitY(), 1.0}});
  ASSERT_EQ(p.cells.size(), 4u);
  std::vector<int> comp{cell_at(p, Vec3(0.5, 0.5, 0.5)), cell_at(p, Vec3(1.5, 0.5, 0.5)),
                        cell_at(p, Vec3(0.5, 1.5, 0.5))};
  std::sort(comp.begin(), comp.end());
  const auto m = extract_mesh(p, comp);
  EXPECT_EQ(m.faces.size(), 8u);
  const auto rep = check_manifold(m);
  EXPECT_TRUE(rep.watertight()) << rep.problem;
  EXPECT_EQ(static_cast<int>(m.vertices.size()) - edge_count(m) + static_cast<int>(m.faces.size()), 2);
  EXPECT_NEAR(mesh_volume(m), 3.0, 1e-9);
}

TEST(Label, ClosedBoxCentroidInterior) {
  const auto regions = box_regions(Vec3(0, 0, 0), Vec3(10, 10, 10));
  EXPECT_TRUE(label_cell(Vec3(5, 5, 5), regions, 100));
  EXPECT_TRUE(label_cell(Vec3(1, 8, 2), regions, 100));
  EXPECT_FALSE(label_cell(Vec3(50, 50, 50), regions, 100));
}

TEST(Label, HalfTheRaysIsExterior) {
  // A huge floor facing down: exactly the downward half of the symmetric
  // direction set reaches it from the interior side.
  const double s = 1e6;
  const auto floor = PlaneRegion::from_polygon(
      Plane{-Vec3::UnitZ(), 0.0}, {{Vec3(-s, -s, 0), Vec3(-s, s, 0), Vec3(s, s, 0), Vec3(s, -s, 0)}});
  EXPECT_EQ(interior_hits(Vec3(0, 0, 1), {floor}, fibonacci_directions(100)), 50);
  EXPECT_FALSE(label_cell(Vec3(0, 0, 1), {floor}, 100));
  EXPECT_EQ(interior_hits(Vec3(0, 0, 1), {floor}, fibonacci_directions(101)), 50);
}

TEST(Label, AgreesWithPointInBox) {
  const auto regions = box_regions(Vec3(0, 0, 0), Vec3(10, 10, 10));
  std::vector<Plane> planes;
  for (const auto& r : regions) planes.push_back(r.plane);
  const auto p = bsp_partition(cube(-2, 12), planes);
  ASSERT_EQ(p.cells.size(), 27u);
  for (const auto& c : p.cells) {
    const bool inside = (c.centroid.array() > 0).all() && (c.centroid.array() < 10).all();
    EXPECT_EQ(label_cell(c.centroid, regions, 100), inside);
  }
}

TEST(Component, LargestByVolumeWithTieBreak) {
  auto p = bsp_partition(slab(Vec3(0, 0, 0), Vec3(5, 1, 1)),
                         {Plane{Vec3::UnitX(), 1}, Plane{Vec3::UnitX(), 2}, Plane{Vec3::UnitX(), 3},
                          Plane{Vec3::UnitX(), 4}});
  ASSERT_EQ(p.cells.size(), 5u);
  std::vector<int> at(5);
  for (int i = 0; i < 5; ++i) at[i] = cell_at(p, Vec3(i + 0.5, 0.5, 0.5));
  const auto adj = cell_adjacency(p);
  auto set = [&](std::vector<int> xs) {
    for (auto& c : p.cells) c.interior = false;
    for (int x : xs) p.cells[at[x]].interior = true;
  };
  set({0, 1, 3});
  auto comp = largest_interior_component(p, adj);
  std::sort(comp.begin(), comp.end());
  std::vector<int> want{at[0], at[1]};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(comp, want);

  set({0, 2, 4});
  comp = largest_interior_component(p, adj);
  ASSERT_EQ(comp.size(), 1u);
  EXPECT_EQ(comp[0], std::min({at[0], at[2], at[4]}));

  set({3});
  EXPECT_EQ(largest_interior_component(p, adj), std::vector<int>{at[3]});
  set({});
  EXPECT_THROW(largest_interior_component(p, adj), Error);
}

TEST(Manifold, DetectsOpenMesh) {
  PolyMesh m = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1));
  auto rep = check_manifold(m);
  EXPECT_TRUE(rep.watertight());
  ASSERT_EQ(rep.euler.size(), 1u);
  EXPECT_EQ(rep.euler[0], 2);
  m.faces.pop_back();
  m.face_plane.pop_back();
  rep = check_manifold(m);
  EXPECT_FALSE(rep.closed);
  EXPECT_FALSE(rep.watertight());
  EXPECT_FALSE(rep.problem.empty());
}

TEST(Manifold, DetectsFlippedFace) {
  PolyMesh m = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1));
  std::reverse(m.faces[2].begin(), m.faces[2].end());
  EXPECT_FALSE(check_manifold(m).closed);
}

TEST(Dedupe, MergesNearDuplicatesIgnoringOrientation) {
  const double tilt = 0.5 * std::numbers::pi / 180.0;
  const std::vector<Plane> planes{Plane{Vec3::UnitZ(), 1.0}, Plane{-Vec3::UnitZ(), -1.0005},
                                  Plane{Vec3(0, std::sin(tilt), std::cos(tilt)), std::cos(tilt)},
                                  Plane{Vec3::UnitZ(), 1.01}, Plane{Vec3(0, std::sin(0.1), std::cos(0.1)), 1.0}};
  const std::vector<Vec3> anchors{Vec3(0, 0, 1), Vec3(0, 0, 1.0005), Vec3(0, 0, 1), Vec3(0, 0, 1.01),
                                  Vec3(0, 0, 1.0 / std::cos(0.1))};
  EXPECT_EQ(dedupe_planes(planes, anchors), (std::vector<int>{0, 3, 4}));
}

TEST(LayerMesh, BoxRegionsGiveWatertightBox) {
  const auto regions = box_regions(Vec3(0, 0, 0), Vec3(10, 6, 4));
  const auto lm = build_layer_mesh(regions, {0, 1, 2, 3, 4, 5}, MeshParams{});
  EXPECT_EQ(lm.mesh.faces.size(), 6u);
  EXPECT_NEAR(mesh_volume(lm.mesh), 240.0, 1e-6);
  EXPECT_TRUE(check_manifold(lm.mesh).watertight());
  for (int fp : lm.mesh.face_plane) EXPECT_GE(fp, 0);
}

TEST(LayerMesh, EmptyLayerThrows) {
  EXPECT_THROW(build_layer_mesh(box_regions(Vec3(0, 0, 0), Vec3(1, 1, 1)), {}, MeshParams{}), Error);
}
