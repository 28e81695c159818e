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

#include "archlod/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace archlod {

void PointCloud::validate() const {
  if (points.empty()) throw Error("empty point cloud");
  if (normals.size() != points.size()) throw Error("point cloud normals missing or mismatched");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw Error("non-finite point at index " + std::to_string(i));
    if (std::abs(normals[i].norm() - 1.0) > 1e-6)
      throw Error("non-unit normal at index " + std::to_string(i));
  }
}

Plane Plane::through(const Vec3& normal, const Vec3& point) {
  Plane p;
  p.normal = normal.normalized();
  p.offset = dot3(p.normal, point);
  return p;
}

AABB AABB::inflated(double fraction) const {
  AABB b = *this;
  const Vec3 pad = extent() * fraction;
  b.min -= pad;
  b.max += pad;
  return b;
}

bool AABB::contains(const Vec3& p, double tol) const {
  return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
}

PlaneFrame PlaneFrame::make(const Plane& plane, const Vec3& near) {
  PlaneFrame f;
  f.n = plane.normal;
  f.origin = plane.project(near);
  if (std::abs(f.n.z()) < 0.9) {
    f.u = Vec3::UnitZ().cross(f.n).normalized();
  } else {
    f.u = f.n.cross(Vec3::UnitX()).cross(f.n).normalized();
    if (f.u.x() < 0) f.u = -f.u;
  }
  f.v = f.n.cross(f.u);
  return f;
}

double ring_signed_area(const Ring2& ring) {
  double a = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) a += cross2(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

double polygon_area(const std::vector<Ring2>& rings) {
  double a = 0.0;
  for (const auto& r : rings) a += ring_signed_area(r);
  return std::abs(a);
}

int winding_number(const Ring2& ring, const Vec2& p) {
  int wn = 0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    const double side = cross2(b - a, p - a);
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0) ++wn;
    } else if (b.y() <= p.y() && side < 0) {
      --wn;
    }
  }
  return wn;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? dot2(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double polygon_boundary_distance(const std::vector<Ring2>& rings, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rings)
    for (std::size_t i = 0; i < r.size(); ++i)
      best = std::min(best, point_segment_distance(p, r[i], r[(i + 1) % r.size()]));
  return best;
}

bool point_in_polygon(const std::vector<Ring2>& rings, const Vec2& p, double tol) {
  int wn = 0;
  for (const auto& r : rings) wn += winding_number(r, p);
  if (wn != 0) return true;
  return polygon_boundary_distance(rings, p) <= tol;
}

void PlaneRegion::finalize() {
  bounds2d = Box2{};
  bounds3d = AABB{};
  for (const auto& r : footprint)
    for (const auto& q : r) {
      bounds2d.extend(q);
      bounds3d.extend(frame.to_world(q));
    }
  area = polygon_area(footprint);
}

void PlaneRegion::reverse() {
  plane.normal = -plane.normal;
  plane.offset = -plane.offset;
  frame.n = -frame.n;
  frame.v = -frame.v;
  for (auto& r : footprint) {
    for (auto& q : r) q.y() = -q.y();
    std::reverse(r.begin(), r.end());
  }
  reversed = !reversed;
  finalize();
}

std::vector<std::vector<Vec3>> PlaneRegion::footprint3d() const {
  std::vector<std::vector<Vec3>> out;
  for (const auto& r : footprint) {
    std::vector<Vec3> ring;
    for (const auto& q : r) ring.push_back(frame.to_world(q));
    out.push_back(std::move(ring));
  }
  return out;
}

PlaneRegion PlaneRegion::from_polygon(const Plane& plane,
                                      const std::vector<std::vector<Vec3>>& rings) {
  if (rings.empty() || rings.front().empty()) throw Error("empty polygon");
  PlaneRegion r;
  r.plane = plane;
  r.frame = PlaneFrame::make(plane, rings.front().front());
  for (const auto& ring : rings) {
    Ring2 loc;
    for (const auto& p : ring) loc.push_back(r.frame.to_local(p));
    r.footprint.push_back(std::move(loc));
  }
  if (ring_signed_area(r.footprint.front()) < 0)
    for (auto& ring : r.footprint) std::reverse(ring.begin(), ring.end());
  r.finalize();
  return r;
}

AABB bounding_box(const std::vector<PlaneRegion>& regions) {
  AABB box;
  for (const auto& r : regions)
    for (const auto& ring : r.footprint)
      for (const auto& q : ring) box.extend(r.frame.to_world(q));
  if (box.empty()) throw Error("no geometry");
  return box;
}

std::optional<RayHit> ray_region_intersect(const Ray& ray, const PlaneRegion& region) {
  const Vec3& n = region.plane.normal;
  const double nd = dot3(n, ray.direction);
  if (std::abs(nd) < kParallelEps) return std::nullopt;
  const double t = (region.plane.offset - dot3(n, ray.origin)) / nd;
  if (!(t > kMinRayT)) return std::nullopt;
  const Vec3 p = ray.origin + t * ray.direction;
  const Vec2 q = region.frame.to_local(p);
  if (!region.bounds2d.contains(q, 1e-9)) return std::nullopt;
  if (!point_in_polygon(region.footprint, q, 1e-9)) return std::nullopt;
  return RayHit{t, nd < 0};
}

}  // namespace archlod
