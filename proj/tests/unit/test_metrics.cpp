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

#include <cmath>
#include <set>

#include "../support.hpp"
#include "archlod/mesh_extract.hpp"
#include "archlod/metrics.hpp"
#include "archlod/plane_detect.hpp"

using namespace archlod;
using archlod::testing::box_cloud;
using archlod::testing::box_mesh;

TEST(Hausdorff, SelfDistanceBelowTwoSpacings) {
  const auto ref = box_cloud(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.02);
  const auto h = hausdorff(ref, box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1)));
  EXPECT_LT(h.symmetric * std::sqrt(3.0), 2 * 0.02);
  EXPECT_LT(h.ref_to_mesh, 1e-12);
  EXPECT_GE(h.mesh_samples, 100000u * 6 / 10);
}

TEST(Hausdorff, ShrinksWithDenseSampling) {
  const auto ref = box_cloud(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.005);
  const auto h = hausdorff(ref, box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1)), 100000);
  const double spacing = std::sqrt(6.0 / static_cast<double>(h.mesh_samples));
  EXPECT_LT(h.symmetric * std::sqrt(3.0), 3 * spacing);
}

TEST(Hausdorff, InflatedCube) {
  const auto ref = box_cloud(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.02);
  const auto h = hausdorff(ref, box_mesh(Vec3(-0.1, -0.1, -0.1), Vec3(1.1, 1.1, 1.1)));
  // Every reference point lies 0.1 inside the nearest face.
  EXPECT_NEAR(h.ref_to_mesh, 0.1 / std::sqrt(3.0), 1e-9);
  // The inflated corners are 0.1 * sqrt(3) from the original ones.
  EXPECT_NEAR(h.mesh_to_ref, 0.1, 1e-9);
  EXPECT_DOUBLE_EQ(h.symmetric, std::max(h.ref_to_mesh, h.mesh_to_ref));
}

TEST(Hausdorff, RejectsBadInput) {
  const auto ref = box_cloud(Vec3(0, 0, 0), Vec3(1, 1, 1), 0.1);
  EXPECT_THROW(hausdorff(ref, PolyMesh{}), Error);
  EXPECT_THROW(hausdorff(PointCloud{}, box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1))), Error);
  EXPECT_THROW(hausdorff(ref, box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1)), 9999), Error);
}

TEST(Hausdorff, ThreadCountDoesNotMatter) {
  const auto ref = box_cloud(Vec3(0, 0, 0), Vec3(2, 1, 1), 0.05);
  const auto mesh = box_mesh(Vec3(0.05, 0, 0), Vec3(2, 1.1, 1));
  const auto a = hausdorff(ref, mesh, 20000, 1), b = hausdorff(ref, mesh, 20000, 4);
  EXPECT_EQ(a.symmetric, b.symmetric);
  EXPECT_EQ(a.mesh_samples, b.mesh_samples);
}

TEST(PointFace, ExactDistances) {
  const auto m = box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1));
  double best = 1e9;
  for (std::size_t f = 0; f < m.faces.size(); ++f) best = std::min(best, point_face_distance(m, f, Vec3(2, 2, 0.5)));
  EXPECT_NEAR(best, std::sqrt(2.0), 1e-12);
  best = 1e9;
  for (std::size_t f = 0; f < m.faces.size(); ++f) best = std::min(best, point_face_distance(m, f, Vec3(0.5, 0.5, 3)));
  EXPECT_NEAR(best, 2.0, 1e-12);
}

TEST(LatticeSamples, StayOnFaces) {
  const auto m = box_mesh(Vec3(0, 0, 0), Vec3(3, 2, 1));
  const auto s = lattice_samples(m, 0.1);
  // Interior lattice plus samples along each face boundary (48 m of edges).
  const double expect = mesh_area(m) / 0.01 + 48.0 / 0.1;
  EXPECT_NEAR(static_cast<double>(s.size()), expect, 0.05 * expect);
  for (const auto& p : s) {
    double best = 1e9;
    for (std::size_t f = 0; f < m.faces.size(); ++f) best = std::min(best, point_face_distance(m, f, p));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(MeshStats, Examples) {
  const auto box = mesh_stats(box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1)));
  EXPECT_EQ(box.vertices, 8);
  EXPECT_EQ(box.polygons, 6);
  EXPECT_EQ(box.triangles, 12);

  PolyMesh quad;
  quad.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0), Vec3(9, 9, 9)};
  quad.faces = {{0, 1, 2, 3}};
  const auto q = mesh_stats(quad);
  EXPECT_EQ(q.vertices, 4);
  EXPECT_EQ(q.polygons, 1);
  EXPECT_EQ(q.triangles, 2);

  AABB b;
  b.extend(Vec3(0, 0, 0));
  b.extend(Vec3(2, 2, 1));
  const auto p = bsp_partition(b, {Plane{Vec3::UnitX(), 1.0}, Plane{Vec3::UnitY(), 1.0}});
  std::vector<int> comp;
  for (std::size_t c = 0; c < p.cells.size(); ++c)
    if (!(p.cells[c].centroid.x() > 1 && p.cells[c].centroid.y() > 1)) comp.push_back(static_cast<int>(c));
  const auto lm = extract_mesh(p, comp);
  const auto l = mesh_stats(lm);
  EXPECT_EQ(l.polygons, 8);
  long tri = 0;
  for (const auto& f : lm.faces) tri += static_cast<long>(f.size()) - 2;
  EXPECT_EQ(l.triangles, tri);
}

TEST(Sdr, Examples) {
  const std::vector<std::vector<int>> ref{{0, 1, 2}, {3, 4}, {5, 6, 7}, {8}};
  EXPECT_DOUBLE_EQ(sdr(ref, ref), 100.0);
  EXPECT_DOUBLE_EQ(sdr({}, ref), 0.0);
  EXPECT_DOUBLE_EQ(sdr({{0, 1}, {3, 4, 9}, {5, 6, 7}}, ref), 75.0);
  EXPECT_THROW(sdr(ref, {}), Error);
}

TEST(Sdr, OneToOneMatching) {
  // Two candidates for the same reference count once; the better one wins
  // and the other is free for nothing else.
  EXPECT_DOUBLE_EQ(sdr({{0, 1, 2}, {0, 1}}, {{0, 1, 2}, {7, 8}}), 50.0);
  // Greedy best-first: {0,1} goes to {0,1} (J=1), leaving {0,1,2,3} for {2,3} (J=0.5).
  EXPECT_DOUBLE_EQ(sdr({{0, 1}, {0, 1, 2, 3}}, {{0, 1}, {2, 3}}), 100.0);
}

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({1, 2}, {3}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({1, 2}, {2, 3}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 1.0);  // identical sets
}

TEST(MapToTruth, DetectedBoxPlanes) {
  const Scene sc = generate(fixture("box"));
  const auto& b = sc.buildings[0];
  auto regions = detect_planes(b.cloud, DetectParams{});
  ASSERT_EQ(regions.size(), 6u);
  const auto m = map_to_truth(regions, b.truth);
  std::set<int> hit(m.begin(), m.end());
  EXPECT_EQ(hit.size(), 6u);
  EXPECT_EQ(hit.count(-1), 0u);
  // Orientation does not matter.
  regions[0].reverse();
  EXPECT_EQ(map_to_truth(regions, b.truth)[0], m[0]);
  // A plane shifted by a metre matches nothing.
  regions[1].plane.offset += 1.0;
  EXPECT_EQ(map_to_truth(regions, b.truth)[1], -1);
}

TEST(Summarize, MeanAndDeviation) {
  std::vector<Hausdorff> hd(2);
  hd[0].symmetric = 0.1;
  hd[1].symmetric = 0.3;
  const auto r = summarize(hd, {MeshStats{8, 12, 6}, MeshStats{12, 20, 8}});
  EXPECT_NEAR(r.hd_mean, 0.2, 1e-12);
  EXPECT_NEAR(r.hd_sd, 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(r.vertices, 10);
  EXPECT_DOUBLE_EQ(r.triangles, 16);
  EXPECT_DOUBLE_EQ(r.polygons, 7);
  EXPECT_EQ(r.meshes, 2);
}
