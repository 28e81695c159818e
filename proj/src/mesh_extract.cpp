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

#include "archlod/mesh_extract.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "archlod/parallel.hpp"
#include "archlod/visibility.hpp"

namespace archlod {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;

uint64_t edge_key(int a, int b) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

Vec3 loop_normal(const std::vector<Vec3>& pts) {
  Vec3 n = Vec3::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[(i + 1) % pts.size()];
    n += Vec3((a.y() - b.y()) * (a.z() + b.z()), (a.z() - b.z()) * (a.x() + b.x()),
              (a.x() - b.x()) * (a.y() + b.y()));
  }
  return 0.5 * n;
}

void cell_moments(const Partition& part, ConvexCell& c) {
  Vec3 r = Vec3::Zero();
  int cnt = 0;
  for (const auto& f : c.faces)
    for (int v : f.loop) {
      r += part.vertices[v];
      ++cnt;
    }
  r /= cnt;
  double vol = 0;
  Vec3 acc = Vec3::Zero();
  for (const auto& f : c.faces) {
    const Vec3& a = part.vertices[f.loop[0]];
    for (std::size_t i = 1; i + 1 < f.loop.size(); ++i) {
      const Vec3& b = part.vertices[f.loop[i]];
      const Vec3& d = part.vertices[f.loop[i + 1]];
      const double v = (a - r).dot((b - r).cross(d - r)) / 6.0;
      vol += v;
      acc += v * (r + a + b + d) / 4.0;
    }
  }
  c.volume = vol;
  c.centroid = vol > 0 ? Vec3(acc / vol) : r;
}

class Splitter {
 public:
  explicit Splitter(Partition& part) : part_(part) {}

  void apply(int pid) {
    const Plane& pl = part_.planes[pid];
    const std::size_t nv = part_.vertices.size();
    sd_.resize(nv);
    cls_.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      sd_[v] = pl.signed_distance(part_.vertices[v]);
      cls_[v] = sd_[v] > part_.eps ? 1 : (sd_[v] < -part_.eps ? -1 : 0);
    }
    cache_.clear();
    std::vector<ConvexCell> out;
    out.reserve(part_.cells.size() + 16);
    for (auto& cell : part_.cells) {
      bool pos = false, neg = false;
      for (const auto& f : cell.faces)
        for (int v : f.loop) {
          pos |= cls_[v] > 0;
          neg |= cls_[v] < 0;
        }
      if (!(pos && neg)) {
        out.push_back(std::move(cell));
        continue;
      }
      auto [a, b] = split(cell, pid);
      out.push_back(std::move(a));
      out.push_back(std::move(b));
      if (out.size() > kMaxCells) throw Error("partition explosion");
    }
    part_.cells = std::move(out);
  }

 private:
  int cut_vertex(int a, int b) {
    if (a > b) std::swap(a, b);
    const uint64_t key = edge_key(a, b);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double t = sd_[a] / (sd_[a] - sd_[b]);
    const Vec3 pa = part_.vertices[a], pb = part_.vertices[b];
    part_.vertices.push_back(pa + t * (pb - pa));
    sd_.push_back(0.0);
    cls_.push_back(0);
    const int id = static_cast<int>(part_.vertices.size()) - 1;
    cache_.emplace(key, id);
    return id;
  }

  std::pair<ConvexCell, ConvexCell> split(const ConvexCell& cell, int pid) {
    ConvexCell negc, posc;
    std::vector<int> cut;
    for (const auto& f : cell.faces) {
      CellFace fn{f.support, f.side, {}}, fp{f.support, f.side, {}};
      bool has_neg = false, has_pos = false;
      const std::size_t m = f.loop.size();
      for (std::size_t i = 0; i < m; ++i) {
        const int a = f.loop[i], b = f.loop[(i + 1) % m];
        const int ca = cls_[a], cb = cls_[b];
        if (ca >= 0) fp.loop.push_back(a);
        if (ca <= 0) fn.loop.push_back(a);
        if (ca == 0) cut.push_back(a);
        has_pos |= ca > 0;
        has_neg |= ca < 0;
        if (ca * cb < 0) {
          const int x = cut_vertex(a, b);
          fp.loop.push_back(x);
          fn.loop.push_back(x);
          cut.push_back(x);
        }
      }
      if (has_neg && fn.loop.size() >= 3) negc.faces.push_back(std::move(fn));
      if (has_pos && fp.loop.size() >= 3) posc.faces.push_back(std::move(fp));
    }
    std::sort(cut.begin(), cut.end());
    cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    const Plane& pl = part_.planes[pid];
    Vec3 mean = Vec3::Zero();
    for (int v : cut) mean += part_.vertices[v];
    mean /= static_cast<double>(cut.size());
    const PlaneFrame fr = PlaneFrame::make(pl, mean);
    const Vec2 m2 = fr.to_local(mean);
    std::vector<std::pair<double, int>> ang;
    for (int v : cut) {
      const Vec2 q = fr.to_local(part_.vertices[v]) - m2;
      ang.emplace_back(std::atan2(q.y(), q.x()), v);
    }
    std::sort(ang.begin(), ang.end());
    CellFace capn{pid, 1, {}}, capp{pid, -1, {}};
    for (const auto& [a, v] : ang) capn.loop.push_back(v);
    capp.loop.assign(capn.loop.rbegin(), capn.loop.rend());
    negc.faces.push_back(std::move(capn));
    posc.faces.push_back(std::move(capp));
    cell_moments(part_, negc);
    cell_moments(part_, posc);
    return {std::move(negc), std::move(posc)};
  }

  Partition& part_;
  std::vector<double> sd_;
  std::vector<int> cls_;
  std::unordered_map<uint64_t, int> cache_;
};

}  // namespace

Partition bsp_partition(const AABB& box, const std::vector<Plane>& planes) {
  if (box.empty() || box.volume() <= 0) throw Error("partition box is empty");
  Partition part;
  part.box = box;
  part.eps = 1e-9 * box.diagonal();
  part.planes = {Plane{Vec3(-1, 0, 0), -box.min.x()}, Plane{Vec3(1, 0, 0), box.max.x()},
                 Plane{Vec3(0, -1, 0), -box.min.y()}, Plane{Vec3(0, 1, 0), box.max.y()},
                 Plane{Vec3(0, 0, -1), -box.min.z()}, Plane{Vec3(0, 0, 1), box.max.z()}};
  for (const auto& p : planes) part.planes.push_back(p);
  for (int i = 0; i < 8; ++i)
    part.vertices.emplace_back(i & 1 ? box.max.x() : box.min.x(), i & 2 ? box.max.y() : box.min.y(),
                               i & 4 ? box.max.z() : box.min.z());
  // Corner loops per wall, oriented below to face outward.
  const int loops[6][4] = {{0, 2, 6, 4}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 5, 7, 6}};
  ConvexCell root;
  for (int w = 0; w < 6; ++w) {
    CellFace f{w, 1, {loops[w][0], loops[w][1], loops[w][2], loops[w][3]}};
    std::vector<Vec3> pts;
    for (int v : f.loop) pts.push_back(part.vertices[v]);
    if (loop_normal(pts).dot(part.planes[w].normal) < 0) std::reverse(f.loop.begin(), f.loop.end());
    root.faces.push_back(std::move(f));
  }
  cell_moments(part, root);
  part.cells.push_back(std::move(root));
  Splitter splitter(part);
  for (std::size_t i = 0; i < planes.size(); ++i) splitter.apply(kBoxPlanes + static_cast<int>(i));
  return part;
}

std::vector<int> dedupe_planes(const std::vector<Plane>& planes, const std::vector<Vec3>& anchors,
                               double angle_deg, double offset) {
  const double cmin = std::cos(angle_deg * std::numbers::pi / 180.0);
  std::vector<int> kept;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    bool dup = false;
    for (int k : kept) {
      if (std::abs(planes[i].normal.dot(planes[k].normal)) < cmin) continue;
      if (std::abs(planes[k].signed_distance(anchors[i])) < offset) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

std::vector<Vec3> fibonacci_directions(int n) {
  if (n < 1) throw Error("need at least one ray direction");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> d;
  d.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    d.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return d;
}

int interior_hits(const Vec3& c, const std::vector<PlaneRegion>& regions, const std::vector<Vec3>& dirs) {
  std::vector<Ray> rays;
  rays.reserve(dirs.size());
  for (const auto& d : dirs) rays.push_back(Ray{c, d});
  const auto hl = compute_hitlist(c, rays, regions);
  return std::accumulate(hl.begin(), hl.end(), 0);
}

bool label_cell(const Vec3& c, const std::vector<PlaneRegion>& regions, int n_r) {
  return 2 * interior_hits(c, regions, fibonacci_directions(n_r)) > n_r;
}

namespace {

struct FaceRef {
  int cell;
  int face;
};

struct FacePair {
  FaceRef neg;  // face with side +1 (its cell lies on the negative side)
  FaceRef pos;
};

struct P2 {
  Vec2 q;
  Vec3 p;
};

double area2(const std::vector<P2>& poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) a += cross2(poly[i].q, poly[(i + 1) % poly.size()].q);
  return 0.5 * a;
}

// Clips subject by a CCW convex polygon; points within tol of an edge count
// as inside.
std::vector<P2> clip_convex(std::vector<P2> subj, const std::vector<Vec2>& clip, double tol) {
  std::vector<P2> out;
  for (std::size_t e = 0; e < clip.size() && !subj.empty(); ++e) {
    const Vec2 c0 = clip[e], c1 = clip[(e + 1) % clip.size()];
    const Vec2 dir = c1 - c0;
    const double len = dir.norm();
    if (len == 0) continue;
    auto side = [&](const Vec2& x) { return cross2(dir, x - c0) / len; };
    out.clear();
    for (std::size_t i = 0; i < subj.size(); ++i) {
      const P2& cur = subj[i];
      const P2& prv = subj[(i + subj.size() - 1) % subj.size()];
      const double sc = side(cur.q), sp = side(prv.q);
      const bool ic = sc >= -tol, ip = sp >= -tol;
      if (ic != ip) {
        const double t = sp / (sp - sc);
        out.push_back(P2{prv.q + t * (cur.q - prv.q), prv.p + t * (cur.p - prv.p)});
      }
      if (ic) out.push_back(cur);
    }
    subj.swap(out);
  }
  return subj;
}

struct PlaneFaces {
  PlaneFrame frame;
  std::vector<FaceRef> refs;
  std::vector<std::vector<Vec2>> loops;  // CCW in frame
  std::vector<Box2> boxes;
};

struct Adjacency {
  std::vector<FacePair> pairs;
  std::vector<std::size_t> face_base;             // first global face index per cell
  std::vector<std::vector<FaceRef>> face_neighbors;  // by global face index
  std::map<int, PlaneFaces> planes;
};

Adjacency compute_adjacency(const Partition& part) {
  Adjacency adj;
  const double diag = part.box.diagonal();
  const double tol = 1e-9 * diag;
  const double area_tol = 1e-12 * diag * diag;
  std::size_t total = 0;
  for (const auto& c : part.cells) {
    adj.face_base.push_back(total);
    total += c.faces.size();
  }
  adj.face_neighbors.resize(total);
  const Vec3 center = 0.5 * (part.box.min + part.box.max);
  for (std::size_t ci = 0; ci < part.cells.size(); ++ci)
    for (std::size_t fi = 0; fi < part.cells[ci].faces.size(); ++fi) {
      const CellFace& f = part.cells[ci].faces[fi];
      if (f.support < kBoxPlanes) continue;
      auto it = adj.planes.find(f.support);
      if (it == adj.planes.end())
        it = adj.planes.emplace(f.support, PlaneFaces{PlaneFrame::make(part.planes[f.support], center), {}, {}, {}})
                 .first;
      PlaneFaces& pf = it->second;
      std::vector<Vec2> loop;
      Box2 b;
      for (int v : f.loop) {
        loop.push_back(pf.frame.to_local(part.vertices[v]));
        b.extend(loop.back());
      }
      if (f.side < 0) std::reverse(loop.begin(), loop.end());
      pf.refs.push_back(FaceRef{static_cast<int>(ci), static_cast<int>(fi)});
      pf.loops.push_back(std::move(loop));
      pf.boxes.push_back(b);
    }
  for (const auto& [support, pf] : adj.planes) {
    std::vector<std::size_t> negs, poss;
    for (std::size_t k = 0; k < pf.refs.size(); ++k)
      (part.cells[pf.refs[k].cell].faces[pf.refs[k].face].side > 0 ? negs : poss).push_back(k);
    for (std::size_t a : negs)
      for (std::size_t b : poss) {
        const Box2& ba = pf.boxes[a];
        const Box2& bb = pf.boxes[b];
        if (ba.min.x() > bb.max.x() - tol || bb.min.x() > ba.max.x() - tol || ba.min.y() > bb.max.y() - tol ||
            bb.min.y() > ba.max.y() - tol)
          continue;
        std::vector<P2> subj;
        for (const auto& q : pf.loops[a]) subj.push_back(P2{q, Vec3::Zero()});
        const auto inter = clip_convex(subj, pf.loops[b], -tol);
        if (inter.size() < 3 || area2(inter) <= area_tol) continue;
        adj.pairs.push_back(FacePair{pf.refs[a], pf.refs[b]});
        adj.face_neighbors[adj.face_base[pf.refs[a].cell] + pf.refs[a].face].push_back(pf.refs[b]);
        adj.face_neighbors[adj.face_base[pf.refs[b].cell] + pf.refs[b].face].push_back(pf.refs[a]);
      }
  }
  return adj;
}

std::vector<std::vector<int>> adjacency_lists(const Partition& part, const Adjacency& adj) {
  std::vector<std::vector<int>> out(part.cells.size());
  for (const auto& p : adj.pairs) {
    out[p.neg.cell].push_back(p.pos.cell);
    out[p.pos.cell].push_back(p.neg.cell);
  }
  for (auto& l : out) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> cell_adjacency(const Partition& part) {
  return adjacency_lists(part, compute_adjacency(part));
}

std::vector<int> largest_interior_component(const Partition& part, const std::vector<std::vector<int>>& adj) {
  const std::size_t n = part.cells.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> comps;
  std::vector<double> vol;
  for (std::size_t s = 0; s < n; ++s) {
    if (!part.cells[s].interior || comp[s] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    vol.push_back(0.0);
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = id;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      comps[id].push_back(c);
      vol[id] += part.cells[c].volume;
      for (int d : adj[c])
        if (part.cells[d].interior && comp[d] < 0) {
          comp[d] = id;
          stack.push_back(d);
        }
    }
  }
  if (comps.empty()) throw Error("empty model at this layer");
  // Components are discovered in ascending order of their smallest cell id,
  // so a strict comparison keeps the tie-break.
  std::size_t best = 0;
  for (std::size_t k = 1; k < comps.size(); ++k)
    if (vol[k] > vol[best] * (1 + 1e-12)) best = k;
  std::sort(comps[best].begin(), comps[best].end());
  return comps[best];
}

ManifoldReport check_manifold(const PolyMesh& mesh) {
  ManifoldReport r;
  AABB box;
  for (const auto& v : mesh.vertices) box.extend(v);
  const double diag = box.diagonal();
  r.no_degenerate = true;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    if (mesh.faces[f].size() < 3 || face_area(mesh, f) <= 1e-14 * diag * diag) {
      r.no_degenerate = false;
      if (r.problem.empty()) {
        r.problem = "degenerate face";
        r.where = mesh.faces[f].empty() ? Vec3::Zero() : mesh.vertices[mesh.faces[f][0]];
      }
    }
  std::unordered_map<uint64_t, int> directed;
  for (const auto& f : mesh.faces)
    for (std::size_t i = 0; i < f.size(); ++i) directed[edge_key(f[i], f[(i + 1) % f.size()])]++;
  r.closed = true;
  for (const auto& f : mesh.faces)
    for (std::size_t i = 0; i < f.size() && r.closed; ++i) {
      const int a = f[i], b = f[(i + 1) % f.size()];
      const auto fw = directed.find(edge_key(a, b));
      const auto bw = directed.find(edge_key(b, a));
      if (fw->second != 1 || bw == directed.end() || bw->second != 1) {
        r.closed = false;
        if (r.problem.empty()) {
          r.problem = "non-manifold edge";
          r.where = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        }
      }
    }
  // Corners around each vertex must form one cycle.
  const std::size_t nv = mesh.vertices.size();
  std::vector<std::vector<std::pair<int, int>>> corners(nv);  // (prev, next)
  for (const auto& f : mesh.faces)
    for (std::size_t i = 0; i < f.size(); ++i)
      corners[f[i]].emplace_back(f[(i + f.size() - 1) % f.size()], f[(i + 1) % f.size()]);
  r.vertex_manifold = true;
  if (r.closed) {
    for (std::size_t v = 0; v < nv && r.vertex_manifold; ++v) {
      const auto& cs = corners[v];
      if (cs.empty()) continue;
      std::unordered_map<int, std::size_t> by_prev;
      for (std::size_t k = 0; k < cs.size(); ++k) by_prev[cs[k].first] = k;
      std::size_t k = 0, steps = 0;
      do {
        auto it = by_prev.find(cs[k].second);
        if (it == by_prev.end()) break;
        k = it->second;
        ++steps;
      } while (k != 0 && steps <= cs.size());
      if (k != 0 || steps != cs.size()) {
        r.vertex_manifold = false;
        if (r.problem.empty()) {
          r.problem = "non-manifold vertex";
          r.where = mesh.vertices[v];
        }
      }
    }
  } else {
    r.vertex_manifold = false;
  }
  // Components by shared vertices.
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& f : mesh.faces)
    for (std::size_t i = 1; i < f.size(); ++i) parent[find(f[i])] = find(f[0]);
  std::map<int, std::array<long, 3>> vef;
  std::vector<char> used(nv, 0);
  for (const auto& f : mesh.faces) {
    if (f.empty()) continue;
    auto& c = vef[find(f[0])];
    c[2] += 1;
    c[1] += static_cast<long>(f.size());
    for (int v : f) used[v] = 1;
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (used[v]) vef[find(static_cast<int>(v))][0] += 1;
  for (const auto& [root, c] : vef) r.euler.push_back(static_cast<int>(c[0] - c[1] / 2 + c[2]));
  r.components = static_cast<int>(vef.size());
  return r;
}

namespace {

struct Piece {
  std::vector<Vec3> pts;
  int support;
};

void drop_repeats(std::vector<int>& loop) {
  bool changed = true;
  while (changed && !loop.empty()) {
    changed = false;
    std::vector<int> out;
    for (std::size_t i = 0; i < loop.size(); ++i)
      if (loop[i] != loop[(i + 1) % loop.size()]) out.push_back(loop[i]);
    // Spikes a-b-a collapse to a.
    for (std::size_t i = 0; out.size() >= 3 && i < out.size(); ++i) {
      const std::size_t n = out.size();
      if (out[i] == out[(i + 2) % n]) {
        const std::size_t j = (i + 1) % n, k = (i + 2) % n;
        std::vector<int> next;
        for (std::size_t t = 0; t < n; ++t)
          if (t != j && t != k) next.push_back(out[t]);
        out.swap(next);
        changed = true;
        break;
      }
    }
    if (out.size() != loop.size()) changed = true;
    loop.swap(out);
  }
}

class Stitcher {
 public:
  Stitcher(double tol) : tol_(tol) {}

  int weld(const Vec3& p) {
    const auto key = cell_of(p);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid_.find({key[0] + dx, key[1] + dy, key[2] + dz});
          if (it == grid_.end()) continue;
          for (int v : it->second)
            if ((verts_[v] - p).norm() <= tol_) return v;
        }
    verts_.push_back(p);
    const int id = static_cast<int>(verts_.size()) - 1;
    grid_[key].push_back(id);
    return id;
  }

  const std::vector<Vec3>& vertices() const { return verts_; }

 private:
  std::array<long, 3> cell_of(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() / tol_)), static_cast<long>(std::floor(p.y() / tol_)),
            static_cast<long>(std::floor(p.z() / tol_))};
  }
  double tol_;
  std::vector<Vec3> verts_;
  std::map<std::array<long, 3>, std::vector<int>> grid_;
};

void fix_t_junctions(std::vector<std::vector<int>>& faces, const std::vector<Vec3>& verts, double tol) {
  std::vector<char> used(verts.size(), 0);
  for (const auto& f : faces)
    for (int v : f) used[v] = 1;
  std::vector<std::pair<BPoint, int>> items;
  for (std::size_t v = 0; v < verts.size(); ++v)
    if (used[v]) items.emplace_back(BPoint(verts[v].x(), verts[v].y(), verts[v].z()), static_cast<int>(v));
  bgi::rtree<std::pair<BPoint, int>, bgi::rstar<16>> tree(items.begin(), items.end());
  std::vector<std::pair<BPoint, int>> hits;
  for (auto& f : faces) {
    std::vector<int> out;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const int a = f[i], b = f[(i + 1) % f.size()];
      out.push_back(a);
      const Vec3 pa = verts[a], pb = verts[b];
      const Vec3 lo = pa.cwiseMin(pb).array() - tol, hi = pa.cwiseMax(pb).array() + tol;
      hits.clear();
      tree.query(bgi::intersects(BBox(BPoint(lo.x(), lo.y(), lo.z()), BPoint(hi.x(), hi.y(), hi.z()))),
                 std::back_inserter(hits));
      const Vec3 d = pb - pa;
      const double len2 = d.squaredNorm();
      if (len2 == 0) continue;
      std::vector<std::pair<double, int>> inside;
      for (const auto& [bp, v] : hits) {
        if (v == a || v == b) continue;
        const double t = (verts[v] - pa).dot(d) / len2;
        if (t <= 0 || t >= 1) continue;
        if ((pa + t * d - verts[v]).norm() > tol) continue;
        inside.emplace_back(t, v);
      }
      std::sort(inside.begin(), inside.end());
      for (const auto& [t, v] : inside) out.push_back(v);
    }
    f.swap(out);
  }
}

// Union of two loops sharing one contiguous chain of edges, or empty.
std::vector<int> merge_loops(const std::vector<int>& A, const std::vector<int>& B) {
  std::unordered_map<uint64_t, int> bedges;
  for (std::size_t i = 0; i < B.size(); ++i) bedges[edge_key(B[i], B[(i + 1) % B.size()])] = 1;
  const std::size_t n = A.size();
  std::vector<char> shared(n);
  std::size_t nshared = 0;
  for (std::size_t i = 0; i < n; ++i) {
    shared[i] = bedges.count(edge_key(A[(i + 1) % n], A[i])) > 0;
    nshared += shared[i];
  }
  if (nshared == 0 || nshared == n) return {};
  std::size_t s = n, runs = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (shared[i] && !shared[(i + n - 1) % n]) {
      s = i;
      ++runs;
    }
  if (runs != 1) return {};
  const std::size_t e = (s + nshared) % n;  // A[s]..A[e] is the shared chain
  std::vector<int> out;
  for (std::size_t k = e;; k = (k + 1) % n) {
    out.push_back(A[k]);
    if (k == s) break;
  }
  const auto js = std::find(B.begin(), B.end(), A[s]);
  if (js == B.end()) return {};
  const std::size_t m = B.size();
  std::size_t j = (static_cast<std::size_t>(js - B.begin()) + 1) % m;
  while (B[j] != A[e]) {
    out.push_back(B[j]);
    j = (j + 1) % m;
  }
  if (out.size() != n + m - 2 * nshared) return {};
  std::vector<int> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return {};
  return out;
}

void merge_coplanar(std::vector<std::vector<int>>& faces, std::vector<int>& support,
                    const std::vector<Vec3>& verts) {
  const std::size_t nf = faces.size();
  std::vector<char> alive(nf, 1);
  std::unordered_map<uint64_t, int> owner;
  auto add_edges = [&](int f) {
    const auto& l = faces[f];
    for (std::size_t i = 0; i < l.size(); ++i) {
      auto [it, fresh] = owner.emplace(edge_key(l[i], l[(i + 1) % l.size()]), f);
      if (!fresh) it->second = -1;
    }
  };
  auto drop_edges = [&](int f) {
    const auto& l = faces[f];
    for (std::size_t i = 0; i < l.size(); ++i) {
      auto it = owner.find(edge_key(l[i], l[(i + 1) % l.size()]));
      if (it != owner.end() && it->second == f) owner.erase(it);
    }
  };
  std::vector<Vec3> normal(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    add_edges(static_cast<int>(f));
    std::vector<Vec3> pts;
    for (int v : faces[f]) pts.push_back(verts[v]);
    normal[f] = loop_normal(pts);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (!alive[f]) continue;
    bool changed = true;
    while (changed) {
      changed = false;
      const auto loop = faces[f];
      for (std::size_t i = 0; i < loop.size() && !changed; ++i) {
        const auto it = owner.find(edge_key(loop[(i + 1) % loop.size()], loop[i]));
        if (it == owner.end() || it->second < 0) continue;
        const int g = it->second;
        if (g == static_cast<int>(f) || !alive[g] || support[g] != support[f]) continue;
        if (normal[g].dot(normal[f]) <= 0) continue;
        auto merged = merge_loops(faces[f], faces[g]);
        if (merged.empty()) continue;
        drop_edges(static_cast<int>(f));
        drop_edges(g);
        faces[f] = std::move(merged);
        alive[g] = 0;
        add_edges(static_cast<int>(f));
        normal[f] += normal[g];
        changed = true;
      }
    }
  }
  std::vector<std::vector<int>> out_faces;
  std::vector<int> out_support;
  for (std::size_t f = 0; f < nf; ++f)
    if (alive[f]) {
      out_faces.push_back(std::move(faces[f]));
      out_support.push_back(support[f]);
    }
  faces.swap(out_faces);
  support.swap(out_support);
}

void remove_collinear(std::vector<std::vector<int>>& faces, const std::vector<Vec3>& verts, double tol) {
  std::vector<std::vector<int>> nbr(verts.size());
  for (const auto& f : faces)
    for (std::size_t i = 0; i < f.size(); ++i) {
      nbr[f[i]].push_back(f[(i + 1) % f.size()]);
      nbr[f[(i + 1) % f.size()]].push_back(f[i]);
    }
  std::vector<char> drop(verts.size(), 0);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    auto& l = nbr[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    if (l.size() != 2) continue;
    const Vec3 a = verts[l[0]], b = verts[l[1]], p = verts[v];
    const Vec3 d = b - a;
    const double t = (p - a).dot(d) / d.squaredNorm();
    if (t > 0 && t < 1 && (a + t * d - p).norm() <= tol) drop[v] = 1;
  }
  for (auto& f : faces) {
    std::vector<int> out;
    for (int v : f)
      if (!drop[v]) out.push_back(v);
    if (out.size() >= 3) f.swap(out);
  }
}

struct Extraction {
  PolyMesh mesh;
  ManifoldReport report;
};

Extraction extract_impl(const Partition& part, const Adjacency& adj, const std::vector<int>& component) {
  const double diag = part.box.diagonal();
  const double tol = 1e-9 * diag;
  const double area_tol = 1e-12 * diag * diag;
  std::vector<char> in(part.cells.size(), 0);
  for (int c : component) in[c] = 1;
  std::vector<Piece> pieces;
  for (int c : component) {
    const ConvexCell& cell = part.cells[c];
    for (std::size_t fi = 0; fi < cell.faces.size(); ++fi) {
      const CellFace& f = cell.faces[fi];
      if (f.support < kBoxPlanes) {
        Piece p{{}, f.support};
        for (int v : f.loop) p.pts.push_back(part.vertices[v]);
        pieces.push_back(std::move(p));
        continue;
      }
      const PlaneFaces& pf = adj.planes.at(f.support);
      std::vector<P2> subj;
      for (int v : f.loop) subj.push_back(P2{pf.frame.to_local(part.vertices[v]), part.vertices[v]});
      const bool flip = f.side < 0;
      if (flip) std::reverse(subj.begin(), subj.end());
      for (const FaceRef& g : adj.face_neighbors[adj.face_base[c] + fi]) {
        if (in[g.cell]) continue;
        const CellFace& gf = part.cells[g.cell].faces[g.face];
        std::vector<Vec2> clip;
        for (int v : gf.loop) clip.push_back(pf.frame.to_local(part.vertices[v]));
        if (gf.side < 0) std::reverse(clip.begin(), clip.end());
        auto inter = clip_convex(subj, clip, tol);
        if (inter.size() < 3 || std::abs(area2(inter)) <= area_tol) continue;
        if (flip) std::reverse(inter.begin(), inter.end());
        Piece p{{}, f.support};
        for (const auto& x : inter) p.pts.push_back(pf.frame.to_world(x.q));
        pieces.push_back(std::move(p));
      }
    }
  }

  const double wtol = 1e-7 * diag;
  Stitcher st(wtol);
  std::vector<std::vector<int>> faces;
  std::vector<int> support;
  for (const auto& p : pieces) {
    std::vector<int> loop;
    for (const auto& x : p.pts) loop.push_back(st.weld(x));
    drop_repeats(loop);
    if (loop.size() < 3) continue;
    faces.push_back(std::move(loop));
    support.push_back(p.support);
  }
  fix_t_junctions(faces, st.vertices(), wtol);
  {
    std::vector<std::vector<int>> f2;
    std::vector<int> s2;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      drop_repeats(faces[f]);
      if (faces[f].size() < 3) continue;
      f2.push_back(std::move(faces[f]));
      s2.push_back(support[f]);
    }
    faces.swap(f2);
    support.swap(s2);
  }
  merge_coplanar(faces, support, st.vertices());
  remove_collinear(faces, st.vertices(), wtol);

  Extraction ex;
  std::vector<int> remap(st.vertices().size(), -1);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    std::vector<int> loop;
    for (int v : faces[f]) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(ex.mesh.vertices.size());
        ex.mesh.vertices.push_back(st.vertices()[v]);
      }
      loop.push_back(remap[v]);
    }
    ex.mesh.faces.push_back(std::move(loop));
    ex.mesh.face_plane.push_back(support[f]);
  }
  ex.report = check_manifold(ex.mesh);
  return ex;
}

std::string describe(const ManifoldReport& r) {
  std::ostringstream os;
  os << std::setprecision(6) << "non-manifold junction (" << (r.problem.empty() ? "open surface" : r.problem)
     << ") at (" << r.where.x() << ", " << r.where.y() << ", " << r.where.z() << ")";
  return os.str();
}

}  // namespace

PolyMesh extract_mesh(const Partition& part, const std::vector<int>& component) {
  if (component.empty()) throw Error("empty model at this layer");
  const Adjacency adj = compute_adjacency(part);
  Extraction ex = extract_impl(part, adj, component);
  if (!(ex.report.closed && ex.report.vertex_manifold)) throw Error(describe(ex.report));
  return std::move(ex.mesh);
}

LayerMesh build_layer_mesh(const std::vector<PlaneRegion>& all_regions, const std::vector<int>& layer,
                           const MeshParams& params) {
  if (layer.empty()) throw Error("empty model at this layer");
  AABB box;
  for (int p : layer) box.extend(all_regions[p].bounds3d);
  box = box.inflated(params.box_margin);
  std::vector<int> order = layer;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return all_regions[a].area > all_regions[b].area; });
  std::vector<Plane> planes;
  std::vector<Vec3> anchors;
  for (int p : order) {
    planes.push_back(all_regions[p].plane);
    anchors.push_back(all_regions[p].plane.project(0.5 * (all_regions[p].bounds3d.min + all_regions[p].bounds3d.max)));
  }
  const auto kept = dedupe_planes(planes, anchors, params.dedupe_angle_deg, params.dedupe_offset);
  std::vector<Plane> use;
  std::vector<int> source;
  for (int k : kept) {
    use.push_back(planes[k]);
    source.push_back(order[k]);
  }
  Partition part = bsp_partition(box, use);
  const auto dirs = fibonacci_directions(params.n_r);
  std::vector<char> label(part.cells.size(), 0);
  parallel_for(part.cells.size(), params.threads, [&](std::size_t c) {
    label[c] = 2 * interior_hits(part.cells[c].centroid, all_regions, dirs) > params.n_r;
  });
  LayerMesh out;
  out.cells = part.cells.size();
  for (std::size_t c = 0; c < part.cells.size(); ++c) {
    part.cells[c].interior = label[c] != 0;
    out.interior_cells += label[c];
  }
  const Adjacency adj = compute_adjacency(part);
  std::vector<int> comp = largest_interior_component(part, adjacency_lists(part, adj));
  const double tol = 1e-6 * part.box.diagonal();
  for (;;) {
    Extraction ex = extract_impl(part, adj, comp);
    if (ex.report.closed && ex.report.vertex_manifold) {
      for (auto& fp : ex.mesh.face_plane) fp = fp < kBoxPlanes ? -1 : source[fp - kBoxPlanes];
      out.mesh = std::move(ex.mesh);
      return out;
    }
    if (out.repairs >= params.max_repairs) throw Error(describe(ex.report));
    std::vector<char> in(part.cells.size(), 0);
    for (int c : comp) in[c] = 1;
    int pick = -1;
    for (std::size_t c = 0; c < part.cells.size(); ++c) {
      if (in[c]) continue;
      bool contains = true;
      for (const auto& f : part.cells[c].faces)
        if (f.side * part.planes[f.support].signed_distance(ex.report.where) > tol) {
          contains = false;
          break;
        }
      if (contains && (pick < 0 || part.cells[c].volume < part.cells[pick].volume)) pick = static_cast<int>(c);
    }
    if (pick < 0) throw Error(describe(ex.report));
    comp.push_back(pick);
    std::sort(comp.begin(), comp.end());
    ++out.repairs;
  }
}

}  // namespace archlod
