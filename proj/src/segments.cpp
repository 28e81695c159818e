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

#include "archlod/segments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

namespace archlod {

long Segment::hits_on(int plane) const {
  const auto it = std::lower_bound(plane_hits.begin(), plane_hits.end(), std::make_pair(plane, 0L),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return (it != plane_hits.end() && it->first == plane) ? it->second : 0;
}

long hsum(const std::vector<int>& planes, const std::vector<uint32_t>& voxels, const VoxelField& field) {
  std::set<int> g(planes.begin(), planes.end());
  long sum = 0;
  for (uint32_t v : voxels) {
    const long k = field.find(v);
    if (k < 0) continue;
    for (const auto& e : field.hits(k))
      if (g.count(e.plane)) sum += e.count;
  }
  return sum;
}

namespace {

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

using Totals = std::vector<std::pair<int, long>>;  // sorted by plane

Totals totals_of(const std::vector<uint32_t>& voxels, const VoxelField& field) {
  std::map<int, long> t;
  for (uint32_t v : voxels) {
    const long k = field.find(v);
    if (k < 0) continue;
    for (const auto& e : field.hits(k)) t[e.plane] += e.count;
  }
  return {t.begin(), t.end()};
}

long sum_over(const Totals& t, const std::vector<int>& planes) {
  long s = 0;
  std::size_t i = 0, j = 0;
  while (i < t.size() && j < planes.size()) {
    if (t[i].first < planes[j]) ++i;
    else if (t[i].first > planes[j]) ++j;
    else s += t[i++].second, ++j;
  }
  return s;
}

Totals merge_totals(const Totals& a, const Totals& b) {
  Totals out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) out.push_back(a[i++]);
    else if (i >= a.size() || b[j].first < a[i].first) out.push_back(b[j++]);
    else out.emplace_back(a[i].first, a[i].second + b[j].second), ++i, ++j;
  }
  return out;
}

std::vector<int> significant(const std::vector<int>& planes, const Totals& t, long total, double share) {
  std::vector<int> out;
  for (int p : planes)
    if (static_cast<double>(sum_over(t, {p})) >= share * static_cast<double>(total)) out.push_back(p);
  return out;
}

// A plane that barely registers in one group (grazing rays, a few mixed voxels
// absorbed earlier) must not vouch for the merge.
bool overlap_ok(const std::vector<int>& pa, const Totals& ta, long total_a, const std::vector<int>& pb,
                const Totals& tb, long total_b, double ratio, double share) {
  const auto inter = intersect(significant(pa, ta, total_a, share), significant(pb, tb, total_b, share));
  if (inter.empty()) return false;
  return static_cast<double>(sum_over(ta, inter)) > ratio * static_cast<double>(total_a) &&
         static_cast<double>(sum_over(tb, inter)) > ratio * static_cast<double>(total_b);
}

// Smaller of the two shares held by the common significant planes.
double overlap_score(const std::vector<int>& pa, const Totals& ta, long total_a, const std::vector<int>& pb,
                     const Totals& tb, long total_b, double share) {
  const auto inter = intersect(significant(pa, ta, total_a, share), significant(pb, tb, total_b, share));
  if (inter.empty() || total_a <= 0 || total_b <= 0) return 0.0;
  return std::min(static_cast<double>(sum_over(ta, inter)) / static_cast<double>(total_a),
                  static_cast<double>(sum_over(tb, inter)) / static_cast<double>(total_b));
}

}  // namespace

bool can_merge(const PlaneGroup& a, const PlaneGroup& b, const VoxelField& field, double overlap_ratio,
               double significance) {
  const Totals ta = totals_of(a.voxels, field), tb = totals_of(b.voxels, field);
  return overlap_ok(a.planes, ta, sum_over(ta, a.planes), b.planes, tb, sum_over(tb, b.planes),
                    overlap_ratio, significance);
}

void compute_voxel_moments(Segment& s, const VoxelGrid& grid) {
  s.centroid.setZero();
  s.covariance.setZero();
  if (s.voxels.empty()) return;
  for (uint32_t v : s.voxels) s.centroid += grid.centroid(v);
  s.centroid /= static_cast<double>(s.voxels.size());
  for (uint32_t v : s.voxels) {
    const Vec3 d = grid.centroid(v) - s.centroid;
    s.covariance += d * d.transpose();
  }
  s.covariance /= static_cast<double>(s.voxels.size());
}

std::vector<Segment> aggregate(const std::vector<PlaneGroup>& groups, const VoxelField& field,
                               SegmentKind kind, double overlap_ratio, uint64_t shuffle_seed,
                               double significance) {
  const std::size_t G = groups.size();
  struct Node {
    std::vector<int> planes;
    Totals tot;
    long total = 0;
    std::vector<uint32_t> voxels;
    bool alive = true;
  };
  std::vector<Node> nodes(G);
  const int n = field.grid.n;
  std::vector<int32_t> owner(static_cast<std::size_t>(n) * n * n, -1);
  for (std::size_t g = 0; g < G; ++g) {
    nodes[g].planes = groups[g].planes;
    std::sort(nodes[g].planes.begin(), nodes[g].planes.end());
    nodes[g].voxels = groups[g].voxels;
    nodes[g].tot = totals_of(groups[g].voxels, field);
    nodes[g].total = sum_over(nodes[g].tot, nodes[g].planes);
    for (uint32_t v : groups[g].voxels) owner[v] = static_cast<int32_t>(g);
  }

  std::vector<std::set<int>> adj(G);
  for (std::size_t g = 0; g < G; ++g)
    for (uint32_t v : groups[g].voxels) {
      const auto c = field.grid.coords(v);
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
            if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) continue;
            const int o = owner[field.grid.id(x, y, z)];
            if (o >= 0 && o != static_cast<int>(g)) adj[g].insert(o);
          }
    }

  // Best-first: always merge the admissible adjacent pair with the highest
  // overlap score, ties to the lower group indices. The fixed point then does
  // not depend on the order in which candidates are visited.
  struct Cand {
    double score;
    int lo, hi;
    uint32_t ver_lo, ver_hi;
    bool operator<(const Cand& o) const {
      if (score != o.score) return score < o.score;
      if (lo != o.lo) return lo > o.lo;
      return hi > o.hi;
    }
  };
  std::vector<uint32_t> version(G, 0);
  std::priority_queue<Cand> heap;
  auto consider = [&](int a, int b) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    const Node& A = nodes[lo];
    const Node& B = nodes[hi];
    if (!overlap_ok(A.planes, A.tot, A.total, B.planes, B.tot, B.total, overlap_ratio, significance)) return;
    const double s = overlap_score(A.planes, A.tot, A.total, B.planes, B.tot, B.total, significance);
    heap.push(Cand{s, lo, hi, version[lo], version[hi]});
  };

  std::vector<int> order(G);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed != 0) {
    std::mt19937_64 rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  for (int a : order)
    for (int b : adj[a])
      if (a < b) consider(a, b);

  while (!heap.empty()) {
    const Cand c = heap.top();
    heap.pop();
    if (!nodes[c.lo].alive || !nodes[c.hi].alive || version[c.lo] != c.ver_lo || version[c.hi] != c.ver_hi)
      continue;
    Node& A = nodes[c.lo];
    Node& B = nodes[c.hi];
    std::vector<int> uni;
    std::set_union(A.planes.begin(), A.planes.end(), B.planes.begin(), B.planes.end(), std::back_inserter(uni));
    A.planes = std::move(uni);
    A.tot = merge_totals(A.tot, B.tot);
    A.total = sum_over(A.tot, A.planes);
    A.voxels.insert(A.voxels.end(), B.voxels.begin(), B.voxels.end());
    B.voxels.clear();
    B.alive = false;
    for (int n : adj[c.hi]) {
      adj[n].erase(c.hi);
      if (n != c.lo) {
        adj[n].insert(c.lo);
        adj[c.lo].insert(n);
      }
    }
    adj[c.lo].erase(c.hi);
    adj[c.hi].clear();
    ++version[c.lo];
    for (int n : adj[c.lo]) consider(c.lo, n);
  }

  std::vector<Segment> out;
  for (auto& node : nodes) {
    if (!node.alive) continue;
    Segment s;
    s.planes = node.planes;
    std::sort(node.voxels.begin(), node.voxels.end());
    s.voxels = std::move(node.voxels);
    s.plane_hits = node.tot;
    s.kind = kind;
    compute_voxel_moments(s, field.grid);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const Segment& x, const Segment& y) { return x.voxels.front() < y.voxels.front(); });
  return out;
}

int AggParams::min_group_hits(int n_r) const {
  return std::max(1, static_cast<int>(std::ceil(group_floor * n_r - 1e-9)));
}

std::vector<Segment> assign_planes(std::vector<Segment> segments) {
  std::map<int, std::pair<long, std::size_t>> best;  // plane -> (hits, segment)
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (int p : segments[s].planes) {
      const long h = segments[s].hits_on(p);
      auto it = best.find(p);
      if (it == best.end() || h > it->second.first) best[p] = {h, s};
    }
  std::vector<Segment> out;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    Segment& seg = segments[s];
    std::vector<int> kept;
    for (int p : seg.planes)
      if (best[p].second == s) kept.push_back(p);
    if (kept.empty()) continue;
    seg.planes = std::move(kept);
    out.push_back(std::move(seg));
  }
  return out;
}

namespace {

std::vector<Segment> segment_pass(const std::vector<PlaneRegion>& regions, const VoxelGrid& grid,
                                  const VisParams& vis, SegmentKind kind, const AggParams& agg) {
  if (regions.empty()) return {};
  const VoxelField field = build_field(regions, grid, vis);
  if (field.size() == 0) return {};
  return assign_planes(
      aggregate(form_plane_groups(field, agg.min_group_hits(vis.n_r)), field, kind, agg.overlap_ratio, 0,
                agg.significance));
}

}  // namespace

Segmentation generate_segments(const std::vector<PlaneRegion>& regions, const AggParams& params,
                               const VisParams& vis) {
  if (params.A_epsilon <= 0) throw Error("A_epsilon must be positive");
  Segmentation result;
  result.grid = make_grid(regions, vis.n_s);

  std::vector<char> small(regions.size(), 0);
  for (std::size_t r = 0; r < regions.size(); ++r) small[r] = regions[r].area < params.A_epsilon;
  result.reversed_planes = static_cast<int>(std::count(small.begin(), small.end(), 1));

  std::vector<char> removed(regions.size(), 0);
  std::vector<Segment> alcoves;
  if (result.reversed_planes > 0) {
    std::vector<PlaneRegion> flipped = regions;
    for (std::size_t r = 0; r < flipped.size(); ++r)
      if (small[r]) flipped[r].reverse();
    for (auto& seg : segment_pass(flipped, result.grid, vis, SegmentKind::Alcove, params)) {
      std::vector<int> kept;
      for (int p : seg.planes)
        if (small[p]) kept.push_back(p);
      if (kept.empty()) continue;
      long inverted = 0, all = 0;
      for (int p : seg.planes) (small[p] ? inverted : all) += seg.hits_on(p);
      all += inverted;
      if (static_cast<double>(inverted) < params.alcove_dominance * static_cast<double>(all)) continue;
      Segment a = seg;
      a.planes = kept;
      a.plane_hits.clear();
      for (int p : kept) a.plane_hits.emplace_back(p, seg.hits_on(p));
      for (int p : kept) removed[p] = 1;
      alcoves.push_back(std::move(a));
    }
  }

  std::vector<PlaneRegion> rest;
  std::vector<int> global_id;
  for (std::size_t r = 0; r < regions.size(); ++r)
    if (!removed[r]) {
      rest.push_back(regions[r]);
      global_id.push_back(static_cast<int>(r));
    }
  auto closed = segment_pass(rest, result.grid, vis, SegmentKind::Closed, params);
  for (auto& seg : closed) {
    for (int& p : seg.planes) p = global_id[p];
    for (auto& ph : seg.plane_hits) ph.first = global_id[ph.first];
  }

  if (alcoves.empty() && closed.empty()) throw Error("building interior not found");
  result.alcove_count = static_cast<int>(alcoves.size());
  result.segments = std::move(alcoves);
  for (auto& s : closed) result.segments.push_back(std::move(s));
  return result;
}

}  // namespace archlod
