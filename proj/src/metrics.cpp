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

#include "archlod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "archlod/parallel.hpp"
#include "archlod/spatial_index.hpp"

namespace archlod {

namespace {

PlaneFrame face_frame(const PolyMesh& mesh, std::size_t f) {
  const Vec3 n = face_normal(mesh, f);
  return PlaneFrame::make(Plane::through(n, mesh.vertices[mesh.faces[f][0]]), Vec3::Zero());
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp(dot3(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

}  // namespace

std::vector<Vec3> lattice_samples(const PolyMesh& mesh, double spacing) {
  if (!(spacing > 0)) throw Error("lattice spacing must be positive");
  std::vector<Vec3> out;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& loop = mesh.faces[f];
    if (loop.size() < 3 || face_normal(mesh, f).squaredNorm() == 0) continue;
    const PlaneFrame fr = face_frame(mesh, f);
    Ring2 ring;
    Box2 box;
    for (int v : loop) {
      ring.push_back(fr.to_local(mesh.vertices[v]));
      box.extend(ring.back());
    }
    const long i0 = static_cast<long>(std::ceil(box.min.x() / spacing));
    const long i1 = static_cast<long>(std::floor(box.max.x() / spacing));
    const long j0 = static_cast<long>(std::ceil(box.min.y() / spacing));
    const long j1 = static_cast<long>(std::floor(box.max.y() / spacing));
    for (long i = i0; i <= i1; ++i)
      for (long j = j0; j <= j1; ++j) {
        const Vec2 q(static_cast<double>(i) * spacing, static_cast<double>(j) * spacing);
        if (winding_number(ring, q) != 0) out.push_back(fr.to_world(q));
      }
    // Boundary samples keep thin faces represented.
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Vec3& a = mesh.vertices[loop[k]];
      const Vec3& b = mesh.vertices[loop[(k + 1) % loop.size()]];
      const long steps = std::max(1L, static_cast<long>(std::ceil((b - a).norm() / spacing)));
      for (long s = 0; s < steps; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / steps));
    }
  }
  return out;
}

double point_face_distance(const PolyMesh& mesh, std::size_t f, const Vec3& p) {
  const auto& loop = mesh.faces[f];
  const Vec3 n = face_normal(mesh, f);
  if (n.squaredNorm() > 0) {
    const PlaneFrame fr = PlaneFrame::make(Plane::through(n, mesh.vertices[loop[0]]), p);
    Ring2 ring;
    for (int v : loop) ring.push_back(fr.to_local(mesh.vertices[v]));
    if (winding_number(ring, Vec2::Zero()) != 0) return std::abs(dot3(p - mesh.vertices[loop[0]], n));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < loop.size(); ++k)
    best = std::min(best, segment_distance(p, mesh.vertices[loop[k]], mesh.vertices[loop[(k + 1) % loop.size()]]));
  return best;
}

Hausdorff hausdorff(const PointCloud& reference, const PolyMesh& mesh, long samples, int threads) {
  if (mesh.empty()) throw Error("empty mesh");
  if (reference.points.empty()) throw Error("empty reference cloud");
  if (samples < 10000) throw Error("hausdorff needs at least 10000 samples");
  AABB box;
  for (const auto& p : reference.points) box.extend(p);
  const Vec3 e = box.extent();
  const double diag = box.diagonal();
  if (!(diag > 0)) throw Error("degenerate reference cloud");
  const double surface = 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  const double spacing = std::sqrt(std::max(surface, diag * diag * 1e-6) / static_cast<double>(samples));

  Hausdorff h;
  const auto lattice = lattice_samples(mesh, spacing);
  h.mesh_samples = lattice.size();

  // Reference to mesh: exact, with per-face boxes for pruning.
  std::vector<AABB> fbox(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    for (int v : mesh.faces[f]) fbox[f].extend(mesh.vertices[v]);
  const std::size_t n = reference.points.size();
  std::vector<double> d_ref(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Vec3& p = reference.points[i];
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(fbox.size());
    for (std::size_t f = 0; f < fbox.size(); ++f) {
      const Vec3 c = p.cwiseMax(fbox[f].min).cwiseMin(fbox[f].max);
      order.emplace_back((p - c).norm(), f);
    }
    std::sort(order.begin(), order.end());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [lb, f] : order) {
      if (lb >= best) break;
      best = std::min(best, point_face_distance(mesh, f, p));
    }
    d_ref[i] = best;
  });
  for (double d : d_ref) h.ref_to_mesh = std::max(h.ref_to_mesh, d);

  if (!lattice.empty()) {
    PointIndex index(reference.points);
    std::vector<double> d_mesh(lattice.size());
    parallel_for(lattice.size(), threads, [&](std::size_t i) { d_mesh[i] = index.nearest(lattice[i]).second; });
    for (double d : d_mesh) h.mesh_to_ref = std::max(h.mesh_to_ref, d);
  }
  h.ref_to_mesh /= diag;
  h.mesh_to_ref /= diag;
  h.symmetric = std::max(h.ref_to_mesh, h.mesh_to_ref);
  return h;
}

MeshStats mesh_stats(const PolyMesh& mesh) {
  MeshStats s;
  std::set<int> used;
  for (const auto& f : mesh.faces) {
    used.insert(f.begin(), f.end());
    s.triangles += std::max<long>(0, static_cast<long>(f.size()) - 2);
  }
  s.vertices = static_cast<long>(used.size());
  s.polygons = static_cast<long>(mesh.faces.size());
  return s;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  const std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (int x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double sdr(const std::vector<std::vector<int>>& found, const std::vector<std::vector<int>>& reference,
           double threshold) {
  if (reference.empty()) throw Error("SDR needs a non-empty reference");
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < found.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j) {
      const double s = jaccard(found[i], reference[j]);
      if (s >= threshold) pairs.emplace_back(-s, j, i);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> used_f(found.size(), 0), used_r(reference.size(), 0);
  std::size_t matched = 0;
  for (const auto& [neg, j, i] : pairs) {
    if (used_f[i] || used_r[j]) continue;
    used_f[i] = used_r[j] = 1;
    ++matched;
  }
  return 100.0 * static_cast<double>(matched) / static_cast<double>(reference.size());
}

std::vector<int> map_to_truth(const std::vector<PlaneRegion>& regions, const GroundTruth& truth,
                              double angle_deg, double offset) {
  const double cos_thr = std::cos(angle_deg * std::numbers::pi / 180.0);
  std::vector<int> out(regions.size(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    const Vec3 c = 0.5 * (reg.bounds3d.min + reg.bounds3d.max);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < truth.planes.size(); ++g) {
      const auto& gp = truth.planes[g];
      const double cs = dot3(reg.plane.normal, gp.normal);
      if (std::abs(cs) < cos_thr) continue;
      const double d = cs > 0 ? reg.plane.offset : -reg.plane.offset;
      if (std::abs(d - gp.offset) > offset) continue;
      const Vec3 lo = gp.bounds.min.array() - 0.5, hi = gp.bounds.max.array() + 0.5;
      if ((reg.bounds3d.max.array() < lo.array()).any() || (reg.bounds3d.min.array() > hi.array()).any())
        continue;
      const Vec3 q = c.cwiseMax(gp.bounds.min).cwiseMin(gp.bounds.max);
      const double dist = (c - q).norm();
      if (dist < best) {
        best = dist;
        out[r] = static_cast<int>(g);
      }
    }
  }
  return out;
}

namespace {

bool vertical(const GtPlane& p) { return std::abs(p.normal.z()) < 0.5; }

}  // namespace

std::vector<std::vector<int>> segment_plane_sets(const std::vector<Segment>& segments,
                                                 const std::vector<int>& mapping, const GroundTruth& truth) {
  std::vector<std::vector<int>> out;
  for (const auto& s : segments) {
    std::set<int> g;
    for (int p : s.planes) {
      if (p < 0 || p >= static_cast<int>(mapping.size())) continue;
      const int m = mapping[p];
      if (m >= 0 && vertical(truth.planes[m])) g.insert(m);
    }
    if (!g.empty()) out.emplace_back(g.begin(), g.end());
  }
  return out;
}

std::vector<std::vector<int>> truth_plane_sets(const GroundTruth& truth) {
  std::vector<std::vector<int>> out;
  for (const auto& s : truth.segments) out.push_back(s.planes);
  return out;
}

EvalReport summarize(const std::vector<Hausdorff>& hd, const std::vector<MeshStats>& stats) {
  EvalReport r;
  r.meshes = static_cast<long>(stats.size());
  if (!hd.empty()) {
    double sum = 0, sq = 0;
    for (const auto& h : hd) sum += h.symmetric;
    r.hd_mean = sum / static_cast<double>(hd.size());
    for (const auto& h : hd) sq += (h.symmetric - r.hd_mean) * (h.symmetric - r.hd_mean);
    r.hd_sd = std::sqrt(sq / static_cast<double>(hd.size()));
  }
  if (!stats.empty()) {
    for (const auto& s : stats) {
      r.vertices += static_cast<double>(s.vertices);
      r.triangles += static_cast<double>(s.triangles);
      r.polygons += static_cast<double>(s.polygons);
    }
    const double n = static_cast<double>(stats.size());
    r.vertices /= n;
    r.triangles /= n;
    r.polygons /= n;
  }
  return r;
}

}  // namespace archlod
