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

#include <limits>
#include <optional>

#include "archlod/common.hpp"

namespace archlod {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  std::size_t size() const { return points.size(); }
  // Throws Error when empty, mismatched, non-finite or non-unit normals.
  void validate() const;
};

struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return dot3(normal, p) - offset; }
  Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
  static Plane through(const Vec3& normal, const Vec3& point);
};

struct AABB {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }
  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const AABB& b) {
    if (b.empty()) return;
    extend(b.min);
    extend(b.max);
  }
  Vec3 extent() const { return max - min; }
  double diagonal() const { return empty() ? 0.0 : extent().norm(); }
  double volume() const { return empty() ? 0.0 : extent().prod(); }
  // Grows each side by `fraction` of the extent along that axis.
  AABB inflated(double fraction) const;
  bool contains(const Vec3& p, double tol = 0.0) const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
};

// Orthonormal frame on a plane with u x v = n.
struct PlaneFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
  Vec3 n = Vec3::UnitZ();

  Vec2 to_local(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {dot3(d, u), dot3(d, v)};
  }
  Vec3 to_world(const Vec2& q) const { return origin + q.x() * u + q.y() * v; }
  // Deterministic frame: u is horizontal unless the plane is near-horizontal.
  static PlaneFrame make(const Plane& plane, const Vec3& near);
};

using Ring2 = std::vector<Vec2>;

struct Box2 {
  Vec2 min = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 max = Vec2::Constant(-std::numeric_limits<double>::infinity());
  void extend(const Vec2& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool contains(const Vec2& p, double tol) const {
    return p.x() >= min.x() - tol && p.x() <= max.x() + tol && p.y() >= min.y() - tol &&
           p.y() <= max.y() + tol;
  }
};

double ring_signed_area(const Ring2& ring);
double polygon_area(const std::vector<Ring2>& rings);
int winding_number(const Ring2& ring, const Vec2& p);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
// Nonzero-winding membership over all rings; points within `tol` of an edge
// count as inside.
bool point_in_polygon(const std::vector<Ring2>& rings, const Vec2& p, double tol = 1e-9);
// Distance from p to the polygon boundary (0 never returned for interior points
// unless p is on an edge).
double polygon_boundary_distance(const std::vector<Ring2>& rings, const Vec2& p);

// A detected planar region. Footprint rings live in `frame` coordinates;
// outer rings are counter-clockwise and holes clockwise with respect to the
// plane normal.
struct PlaneRegion {
  Plane plane;
  PlaneFrame frame;
  std::vector<int> inliers;
  std::vector<Ring2> footprint;
  Box2 bounds2d;
  AABB bounds3d;
  double area = 0.0;
  bool reversed = false;
  double orientation_agreement = 1.0;

  // Recomputes bounds and area from plane, frame and footprint.
  void finalize();
  // Flips the plane orientation, mirroring the frame so that the footprint
  // keeps the same world-space extent with reversed winding.
  void reverse();
  std::vector<std::vector<Vec3>> footprint3d() const;
  static PlaneRegion from_polygon(const Plane& plane, const std::vector<std::vector<Vec3>>& rings);
};

AABB bounding_box(const std::vector<PlaneRegion>& regions);

struct RayHit {
  double t = 0.0;
  bool front_facing = false;
};

constexpr double kMinRayT = 1e-9;
constexpr double kParallelEps = 1e-12;

std::optional<RayHit> ray_region_intersect(const Ray& ray, const PlaneRegion& region);

}  // namespace archlod
