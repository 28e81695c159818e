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

#include <numbers>
#include <random>

#include "../support.hpp"
#include "archlod/alpha_shape.hpp"
#include "archlod/plane_detect.hpp"
#include "archlod/synth.hpp"

using namespace archlod;
using archlod::testing::box_cloud;

namespace {

double angle_deg(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(std::abs(a.dot(b)), 0.0, 1.0)) * 180.0 / std::numbers::pi;
}

// Matches each truth plane to the detected region with the closest normal
// and offset; returns false when one is missing.
bool recovered(const std::vector<PlaneRegion>& regions, const std::vector<GtPlane>& truth, double max_angle,
               double max_offset) {
  for (const auto& g : truth) {
    bool found = false;
    for (const auto& r : regions) {
      const double cs = r.plane.normal.dot(g.normal);
      if (cs <= 0) continue;
      if (angle_deg(r.plane.normal, g.normal) < max_angle && std::abs(r.plane.offset - g.offset) < max_offset)
        found = true;
    }
    if (!found) return false;
  }
  return true;
}

std::vector<Vec2> square_grid(double side, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) pts.emplace_back(side * i / n, side * j / n);
  return pts;
}

}  // namespace

TEST(FitPlane, ExactPoints) {
  const std::vector<Vec3> pts{Vec3(0, 0, 2), Vec3(1, 0, 2), Vec3(0, 1, 2), Vec3(1, 1, 2)};
  double rms = 1;
  const Plane p = fit_plane(pts, &rms);
  EXPECT_NEAR(std::abs(p.normal.z()), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(p.offset), 2.0, 1e-12);
  EXPECT_NEAR(rms, 0.0, 1e-9);
}

TEST(DetectPlanes, NoiselessCubeGivesSixAxisPlanes) {
  auto spec = fixture("cube");
  const Scene s = generate(spec);
  const auto regions = detect_planes(s.buildings[0].cloud, DetectParams{});
  ASSERT_EQ(regions.size(), 6u);
  for (const auto& r : regions) {
    const double best = std::max({std::abs(r.plane.normal.x()), std::abs(r.plane.normal.y()),
                                  std::abs(r.plane.normal.z())});
    EXPECT_LT(std::acos(std::min(1.0, best)), 1e-3);
  }
}

TEST(DetectPlanes, NoisyBoxWithinTolerance) {
  const Scene s = generate(fixture("box"));  // sigma 0.02
  const auto regions = detect_planes(s.buildings[0].cloud, DetectParams{});
  EXPECT_EQ(regions.size(), 6u);
  EXPECT_TRUE(recovered(regions, s.buildings[0].truth.planes, 2.0, 0.05));
}

TEST(DetectPlanes, CollinearPointsHaveNoPlanes) {
  PointCloud c;
  for (int i = 0; i < 10; ++i) {
    c.points.emplace_back(i, 0, 0);
    c.normals.push_back(Vec3::UnitZ());
  }
  try {
    detect_planes(c, DetectParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no primary planes");
  }
}

TEST(DetectPlanes, RegionInvariants) {
  const Scene s = generate(fixture("rooftop-box"));
  const auto& cloud = s.buildings[0].cloud;
  const DetectParams params;
  const auto regions = detect_planes(cloud, params);
  std::vector<char> seen(cloud.size(), 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    EXPECT_GE(static_cast<int>(r.inliers.size()), params.min_region_size);
    EXPECT_GT(r.area, 0);
    if (i > 0) {
      EXPECT_LE(r.area, regions[i - 1].area);
    }
    for (int idx : r.inliers) {
      EXPECT_FALSE(seen[idx]) << "inlier shared between regions";
      seen[idx] = 1;
      EXPECT_LE(std::abs(r.plane.signed_distance(cloud.points[idx])), params.distance_threshold + 1e-9);
    }
    total += r.inliers.size();
    for (const auto& ring : r.footprint3d())
      for (const auto& p : ring) EXPECT_LT(std::abs(r.plane.signed_distance(p)), 1e-6);
  }
  EXPECT_LE(total, cloud.size());
  EXPECT_TRUE(recovered(regions, s.buildings[0].truth.planes, 2.0, 0.05));
}

TEST(DetectPlanes, RigidInvariance) {
  const Scene s = generate(fixture("rooftop-box"));
  const PointCloud& c = s.buildings[0].cloud;
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.6, Vec3(0.2, -0.4, 1).normalized()).toRotationMatrix();
  PointCloud moved;
  for (std::size_t i = 0; i < c.size(); ++i) {
    moved.points.push_back(R * c.points[i] + Vec3(30, -12, 5));
    moved.normals.push_back(R * c.normals[i]);
  }
  const auto a = detect_planes(c, DetectParams{}), b = detect_planes(moved, DetectParams{});
  ASSERT_EQ(a.size(), b.size());
  // Greedy matching is exact here: the normals are far apart except for
  // parallel walls, which the offsets separate.
  for (const auto& ra : a) {
    const Vec3 n = R * ra.plane.normal;
    const double off = ra.plane.offset + n.dot(Vec3(30, -12, 5));
    double best = 1e9;
    for (const auto& rb : b)
      if (std::abs(rb.plane.offset - off) < 0.1) best = std::min(best, angle_deg(n, rb.plane.normal));
    EXPECT_LT(best, 1.0);
  }
}

TEST(Footprint, DenseSquare) {
  auto pts = square_grid(1.0, 40);
  const auto rings = alpha_shape_boundary(pts, 0.5);
  EXPECT_NEAR(polygon_area(rings), 1.0, 0.05);
}

TEST(Footprint, TriangleWithLargeAlpha) {
  const std::vector<Vec2> pts{{0, 0}, {2, 0}, {0, 1}};
  const auto rings = alpha_shape_boundary(pts, 100.0);
  ASSERT_EQ(rings.size(), 1u);
  EXPECT_EQ(rings[0].size(), 3u);
  EXPECT_NEAR(polygon_area(rings), 1.0, 1e-12);
}

TEST(Footprint, LShapeIsNonConvex) {
  std::vector<Vec2> pts;
  for (const auto& p : square_grid(2.0, 40))
    if (p.x() <= 1.0 + 1e-12 || p.y() <= 1.0 + 1e-12) pts.push_back(p);
  const auto rings = alpha_shape_boundary(pts, 0.3);
  const double area = polygon_area(rings);
  EXPECT_NEAR(area, 3.0, 0.15);
  EXPECT_FALSE(point_in_polygon(rings, Vec2(1.6, 1.6)));
}

TEST(Footprint, CollinearIsDegenerate) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(i, 0, 0);
  try {
    region_footprint(Plane{Vec3::UnitZ(), 0}, pts, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "degenerate region");
  }
}

TEST(Footprint, RegionAreaExamples) {
  auto make = [](std::vector<std::vector<Vec3>> rings) {
    return region_area(PlaneRegion::from_polygon(Plane{Vec3::UnitZ(), 0}, rings));
  };
  EXPECT_NEAR(make({{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)}}), 1.0, 1e-12);
  EXPECT_NEAR(make({{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(2, 3, 0), Vec3(0, 3, 0)}}), 6.0, 1e-12);
  EXPECT_NEAR(make({{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)},
                    {Vec3(0.25, 0.25, 0), Vec3(0.25, 0.75, 0), Vec3(0.75, 0.75, 0), Vec3(0.75, 0.25, 0)}}),
              0.75, 1e-12);
}

TEST(Footprint, DilationGrowsSquareByMargin) {
  const std::vector<Ring2> sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  const auto d = dilate_rings(sq, 0.1);
  EXPECT_NEAR(polygon_area(d), 1.2 * 1.2, 1e-9);
  EXPECT_NEAR(polygon_area(dilate_rings(sq, 0.0)), 1.0, 1e-12);
}

TEST(DetectPlanes, LatticeBoxOrientsOutward) {
  const auto cloud = box_cloud(Vec3(0, 0, 0), Vec3(10, 8, 6), 0.25);
  const auto regions = detect_planes(cloud, DetectParams{});
  ASSERT_EQ(regions.size(), 6u);
  const Vec3 center(5, 4, 3);
  for (const auto& r : regions) {
    EXPECT_LT(r.plane.signed_distance(center), 0);
    EXPECT_NEAR(r.orientation_agreement, 1.0, 1e-12);
  }
}
