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

#include "archlod/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "archlod/parallel.hpp"

namespace archlod {

namespace {

constexpr double kInsideEps = -1e-7;
// Candidate intervals are widened by this much; hits closer than this to an
// interval end are re-checked with the exact polygon test.
constexpr double kMargin = 1e-7;

}  // namespace

VoxelGrid VoxelGrid::over(const AABB& box, int n) {
  if (n < 1) throw Error("grid resolution must be positive");
  VoxelGrid g;
  g.box = box;
  g.n = n;
  g.cell = box.extent() / static_cast<double>(n);
  return g;
}

VoxelGrid make_grid(const std::vector<PlaneRegion>& regions, int n_s) {
  return VoxelGrid::over(bounding_box(regions).inflated(0.02), n_s);
}

long VoxelField::find(uint32_t voxel) const {
  const auto it = std::lower_bound(voxels.begin(), voxels.end(), voxel);
  if (it == voxels.end() || *it != voxel) return -1;
  return static_cast<long>(it - voxels.begin());
}

std::vector<int> VoxelField::dense_hitlist(std::size_t k) const {
  std::vector<int> out(n_p, 0);
  for (const auto& e : hits(k)) out[e.plane] = e.count;
  return out;
}

std::vector<Vec3> ray_directions(int n_r) {
  std::vector<Vec3> dirs;
  dirs.reserve(n_r);
  for (int k = 0; k < n_r; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_r;
    double c = std::cos(th), s = std::sin(th);
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    dirs.emplace_back(c, s, 0.0);
  }
  return dirs;
}

std::vector<Ray> emit_rays(const Vec3& centroid, int n_r) {
  if (n_r < 4) throw Error("n_r must be at least 4");
  std::vector<Ray> rays;
  for (const auto& d : ray_directions(n_r)) rays.push_back(Ray{centroid, d});
  return rays;
}

std::vector<int> compute_hitlist(const Vec3& centroid, const std::vector<Ray>& rays,
                                 const std::vector<PlaneRegion>& regions) {
  std::vector<int> counts(regions.size(), 0);
  for (const auto& ray : rays) {
    double best_t = std::numeric_limits<double>::infinity();
    int best = -1;
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const auto hit = ray_region_intersect(ray, regions[r]);
      if (hit && hit->t < best_t) {
        best_t = hit->t;
        best = static_cast<int>(r);
      }
    }
    if (best >= 0 && regions[best].plane.signed_distance(centroid) < kInsideEps) ++counts[best];
  }
  return counts;
}

namespace {

struct SliceSeg {
  int region;
  Vec2 a, b;
};

// Intersection of every non-horizontal footprint with the plane z = zc,
// as 2D segments in xy.
std::vector<SliceSeg> slice_segments(const std::vector<PlaneRegion>& regions, double zc,
                                     std::vector<char>& in_slice) {
  std::vector<SliceSeg> segs;
  std::vector<std::pair<double, int>> xs;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& R = regions[r];
    in_slice[r] = 0;
    if (zc < R.bounds3d.min.z() - kMargin || zc > R.bounds3d.max.z() + kMargin) continue;
    const Vec2 g(R.frame.u.z(), R.frame.v.z());
    const double gn = g.norm();
    if (gn <= kParallelEps) continue;
    in_slice[r] = 1;
    const double h = zc - R.frame.origin.z();
    const Vec2 w(-g.y() / gn, g.x() / gn);
    const Vec2 x0 = g * (h / (gn * gn));
    xs.clear();
    for (const auto& ring : R.footprint) {
      const std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = ring[i];
        const Vec2& q = ring[(i + 1) % n];
        const double fp = dot2(g, p) - h, fq = dot2(g, q) - h;
        if ((fp < 0) != (fq < 0)) {
          const Vec2 x = p + (q - p) * (fp / (fp - fq));
          xs.emplace_back(dot2(w, x), fp < 0 ? 1 : -1);
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    int wn = 0;
    double start = 0.0;
    for (const auto& [lam, delta] : xs) {
      const int prev = wn;
      wn += delta;
      if (prev == 0 && wn != 0) start = lam;
      if (prev != 0 && wn == 0 && lam > start) {
        const Vec3 A = R.frame.to_world(x0 + start * w);
        const Vec3 B = R.frame.to_world(x0 + lam * w);
        segs.push_back({static_cast<int>(r), A.head<2>(), B.head<2>()});
      }
    }
  }
  return segs;
}

struct DirIndex {
  std::vector<double> bp;        // sorted breakpoints
  std::vector<uint32_t> start;   // CSR offsets per elementary interval
  std::vector<uint32_t> items;   // segment indices
  std::vector<double> rlo, rhi;  // robust range per segment
  double sgn = 1.0;
};

void build_dir_index(const std::vector<SliceSeg>& segs, const Vec3& d,
                     const std::vector<char>& parallel, DirIndex& ix) {
  const std::size_t S = segs.size();
  ix.sgn = (-d.y() >= 0) ? 1.0 : -1.0;
  ix.bp.clear();
  ix.rlo.assign(S, 0.0);
  ix.rhi.assign(S, 0.0);
  std::vector<double> lo(S), hi(S);
  for (std::size_t j = 0; j < S; ++j) {
    const double sa = ix.sgn * (-d.y() * segs[j].a.x() + d.x() * segs[j].a.y());
    const double sb = ix.sgn * (-d.y() * segs[j].b.x() + d.x() * segs[j].b.y());
    const double mn = std::min(sa, sb), mx = std::max(sa, sb);
    ix.rlo[j] = mn + kMargin;
    ix.rhi[j] = mx - kMargin;
    lo[j] = mn - kMargin;
    hi[j] = mx + kMargin;
    if (parallel[segs[j].region]) continue;
    ix.bp.push_back(lo[j]);
    ix.bp.push_back(hi[j]);
  }
  std::sort(ix.bp.begin(), ix.bp.end());
  ix.bp.erase(std::unique(ix.bp.begin(), ix.bp.end()), ix.bp.end());
  const std::size_t m = ix.bp.empty() ? 0 : ix.bp.size() - 1;
  std::vector<uint32_t> count(m + 1, 0);
  std::vector<std::pair<std::size_t, std::size_t>> span(S, {0, 0});
  for (std::size_t j = 0; j < S; ++j) {
    if (parallel[segs[j].region]) continue;
    const std::size_t a = std::lower_bound(ix.bp.begin(), ix.bp.end(), lo[j]) - ix.bp.begin();
    const std::size_t b = std::lower_bound(ix.bp.begin(), ix.bp.end(), hi[j]) - ix.bp.begin();
    span[j] = {a, b};
    for (std::size_t i = a; i < b; ++i) ++count[i];
  }
  ix.start.assign(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) ix.start[i + 1] = ix.start[i] + count[i];
  ix.items.assign(m ? ix.start[m] : 0, 0);
  std::vector<uint32_t> fill(ix.start.begin(), ix.start.end());
  for (std::size_t j = 0; j < S; ++j)
    for (std::size_t i = span[j].first; i < span[j].second; ++i) ix.items[fill[i]++] = static_cast<uint32_t>(j);
}

struct SliceResult {
  std::vector<uint32_t> voxels;
  std::vector<uint32_t> counts;
  std::vector<HitEntry> entries;
};

void finish_voxel(std::vector<int16_t>& winners, int valid, int n_r, uint32_t id, SliceResult& out) {
  if (!validate_voxel(valid, n_r)) return;
  std::sort(winners.begin(), winners.begin() + valid);
  uint32_t added = 0;
  for (int i = 0; i < valid;) {
    int j = i;
    while (j < valid && winners[j] == winners[i]) ++j;
    out.entries.push_back({static_cast<uint16_t>(winners[i]), static_cast<uint16_t>(j - i)});
    ++added;
    i = j;
  }
  out.voxels.push_back(id);
  out.counts.push_back(added);
}

SliceResult brute_slice(const std::vector<PlaneRegion>& regions, const VoxelGrid& grid, int iz,
                        int n_r) {
  SliceResult out;
  std::vector<int16_t> winners(n_r);
  for (int iy = 0; iy < grid.n; ++iy)
    for (int ix = 0; ix < grid.n; ++ix) {
      const Vec3 o = grid.centroid(ix, iy, iz);
      const auto counts = compute_hitlist(o, emit_rays(o, n_r), regions);
      int valid = 0;
      for (std::size_t p = 0; p < counts.size(); ++p)
        for (int c = 0; c < counts[p]; ++c) winners[valid++] = static_cast<int16_t>(p);
      finish_voxel(winners, valid, n_r, grid.id(ix, iy, iz), out);
    }
  return out;
}

SliceResult fast_slice(const std::vector<PlaneRegion>& regions, const VoxelGrid& grid, int iz,
                       const std::vector<Vec3>& dirs, const std::vector<double>& nd) {
  SliceResult out;
  const int n_r = static_cast<int>(dirs.size());
  const std::size_t n_p = regions.size();
  const double zc = grid.centroid(0, 0, iz).z();
  std::vector<char> in_slice(n_p, 0);
  const auto segs = slice_segments(regions, zc, in_slice);
  if (segs.empty()) return out;

  // Any region hit in this slice lies inside this xy box.
  double X0 = std::numeric_limits<double>::infinity(), X1 = -X0, Y0 = X0, Y1 = -X0;
  for (std::size_t r = 0; r < n_p; ++r)
    if (in_slice[r]) {
      X0 = std::min(X0, regions[r].bounds3d.min.x());
      X1 = std::max(X1, regions[r].bounds3d.max.x());
      Y0 = std::min(Y0, regions[r].bounds3d.min.y());
      Y1 = std::max(Y1, regions[r].bounds3d.max.y());
    }
  int c_xpos = 0, c_xneg = 0, c_ypos = 0, c_yneg = 0;
  for (const auto& d : dirs) {
    c_xpos += d.x() >= 0;
    c_xneg += d.x() <= 0;
    c_ypos += d.y() >= 0;
    c_yneg += d.y() <= 0;
  }

  std::vector<DirIndex> index(n_r);
  std::vector<char> parallel(n_p);
  for (int k = 0; k < n_r; ++k) {
    for (std::size_t r = 0; r < n_p; ++r) parallel[r] = std::abs(nd[k * n_p + r]) < kParallelEps;
    build_dir_index(segs, dirs[k], parallel, index[k]);
  }

  const int need = (n_r + 1) / 2;
  std::vector<int16_t> winners(n_r);
  std::vector<long> ptr(n_r);
  std::vector<int> ptr_row(n_r, -1);  // row for which ptr[k] is current
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      const Vec3 o = grid.centroid(ix, iy, iz);
      int max_hits = n_r;
      if (o.x() > X1 + kMargin) max_hits = std::min(max_hits, n_r - c_xpos);
      if (o.x() < X0 - kMargin) max_hits = std::min(max_hits, n_r - c_xneg);
      if (o.y() > Y1 + kMargin) max_hits = std::min(max_hits, n_r - c_ypos);
      if (o.y() < Y0 - kMargin) max_hits = std::min(max_hits, n_r - c_yneg);
      if (max_hits < need) continue;

      int valid = 0;
      for (int k = 0; k < n_r; ++k) {
        if (valid + (n_r - k) < need) break;
        const Vec3& d = dirs[k];
        DirIndex& di = index[k];
        if (di.bp.size() < 2) continue;
        const double s = di.sgn * (-d.y() * o.x() + d.x() * o.y());
        long& p = ptr[k];
        if (ptr_row[k] != iy) {
          ptr_row[k] = iy;
          p = static_cast<long>(std::upper_bound(di.bp.begin(), di.bp.end(), s) - di.bp.begin()) - 1;
        } else {
          while (p + 1 < static_cast<long>(di.bp.size()) && di.bp[p + 1] <= s) ++p;
        }
        if (p < 0 || p + 1 >= static_cast<long>(di.bp.size())) continue;
        double best_t = std::numeric_limits<double>::infinity();
        int best = -1;
        for (uint32_t it = di.start[p]; it < di.start[p + 1]; ++it) {
          const uint32_t j = di.items[it];
          const int r = segs[j].region;
          const auto& R = regions[r];
          const double t = (R.plane.offset - dot3(R.plane.normal, o)) / nd[k * n_p + r];
          if (!(t > kMinRayT)) continue;
          if (t > best_t || (t == best_t && r > best)) continue;
          if (!(s >= di.rlo[j] && s <= di.rhi[j])) {
            if (!ray_region_intersect(Ray{o, d}, R)) continue;
          }
          best_t = t;
          best = r;
        }
        if (best >= 0 && regions[best].plane.signed_distance(o) < kInsideEps)
          winners[valid++] = static_cast<int16_t>(best);
      }
      finish_voxel(winners, valid, n_r, grid.id(ix, iy, iz), out);
    }
  }
  return out;
}

}  // namespace

VoxelField build_field(const std::vector<PlaneRegion>& regions, const VoxelGrid& grid,
                       const VisParams& params) {
  if (params.n_r < 4) throw Error("n_r must be at least 4");
  if (params.n_s < 2) throw Error("n_s must be at least 2");
  if (regions.size() > 32767) throw Error("too many planes for visibility analysis");
  if (params.n_r > 65535) throw Error("n_r too large");
  const auto dirs = ray_directions(params.n_r);
  const std::size_t n_p = regions.size();
  std::vector<double> nd(dirs.size() * n_p);
  for (std::size_t k = 0; k < dirs.size(); ++k)
    for (std::size_t r = 0; r < n_p; ++r) nd[k * n_p + r] = dot3(regions[r].plane.normal, dirs[k]);

  std::vector<SliceResult> slices(grid.n);
  parallel_for(grid.n, params.threads, [&](std::size_t iz) {
    slices[iz] = params.brute_force ? brute_slice(regions, grid, static_cast<int>(iz), params.n_r)
                                    : fast_slice(regions, grid, static_cast<int>(iz), dirs, nd);
  });

  VoxelField f;
  f.grid = grid;
  f.n_p = static_cast<int>(n_p);
  f.n_r = params.n_r;
  for (auto& s : slices) {
    std::size_t e = 0;
    for (std::size_t v = 0; v < s.voxels.size(); ++v) {
      f.voxels.push_back(s.voxels[v]);
      for (uint32_t c = 0; c < s.counts[v]; ++c) f.entries.push_back(s.entries[e++]);
      f.offsets.push_back(static_cast<uint32_t>(f.entries.size()));
    }
    s = SliceResult{};
  }
  return f;
}

std::vector<PlaneGroup> form_plane_groups(const VoxelField& field, int min_hits) {
  if (field.size() == 0) throw Error("building interior not found");
  std::map<std::vector<int>, std::size_t> lookup;
  std::vector<PlaneGroup> groups;
  std::vector<int> key;
  for (std::size_t k = 0; k < field.size(); ++k) {
    key.clear();
    int top = 0;
    for (const auto& e : field.hits(k)) {
      top = std::max<int>(top, e.count);
      if (e.count >= min_hits) key.push_back(e.plane);
    }
    if (key.empty())
      for (const auto& e : field.hits(k))
        if (e.count == top) key.push_back(e.plane);
    auto [it, inserted] = lookup.try_emplace(key, groups.size());
    if (inserted) groups.push_back(PlaneGroup{key, {}});
    groups[it->second].voxels.push_back(field.voxels[k]);
  }
  return groups;
}

}  // namespace archlod
