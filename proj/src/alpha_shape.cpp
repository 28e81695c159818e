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

#include "archlod/alpha_shape.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/polygon/voronoi.hpp>
#include <cmath>
#include <map>
#include <numbers>

namespace archlod {

namespace bp = boost::polygon;

std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<Vec2>& pts) {
  std::vector<std::array<int, 3>> tris;
  if (pts.size() < 3) return tris;
  Vec2 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double ext = std::max((hi - lo).maxCoeff(), 1e-12);
  const double scale = double(1 << 26) / ext;

  // Quantize and collapse duplicates onto their lowest index.
  std::vector<std::pair<std::pair<int, int>, int>> keyed;
  keyed.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int x = static_cast<int>(std::llround((pts[i].x() - lo.x()) * scale));
    const int y = static_cast<int>(std::llround((pts[i].y() - lo.y()) * scale));
    keyed.push_back({{x, y}, static_cast<int>(i)});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<bp::point_data<int>> sites;
  std::vector<int> site_index;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
    sites.emplace_back(keyed[i].first.first, keyed[i].first.second);
    site_index.push_back(keyed[i].second);
  }
  if (sites.size() < 3) return tris;

  bp::voronoi_diagram<double> vd;
  bp::construct_voronoi(sites.begin(), sites.end(), &vd);

  auto orient = [&](int a, int b, int c) {
    const long long ax = sites[a].x(), ay = sites[a].y();
    const long long abx = sites[b].x() - ax, aby = sites[b].y() - ay;
    const long long acx = sites[c].x() - ax, acy = sites[c].y() - ay;
    const long double cr = static_cast<long double>(abx) * acy - static_cast<long double>(aby) * acx;
    return cr > 0 ? 1 : (cr < 0 ? -1 : 0);
  };

  std::vector<int> ring;
  for (const auto& vertex : vd.vertices()) {
    ring.clear();
    const auto* e = vertex.incident_edge();
    do {
      ring.push_back(static_cast<int>(e->cell()->source_index()));
      e = e->rot_next();
    } while (e != vertex.incident_edge());
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
      int a = ring[0], b = ring[k], c = ring[k + 1];
      const int o = orient(a, b, c);
      if (o == 0) continue;
      if (o < 0) std::swap(b, c);
      tris.push_back({site_index[a], site_index[b], site_index[c]});
    }
  }
  return tris;
}

namespace {

double circumradius(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm(), lb = (a - c).norm(), lc = (a - b).norm();
  const double twice_area = std::abs(cross2(b - a, c - a));
  if (twice_area <= 0) return std::numeric_limits<double>::infinity();
  return la * lb * lc / (2.0 * twice_area);
}

Ring2 drop_collinear(const Ring2& r) {
  if (r.size() <= 3) return r;
  Ring2 out;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = r[(i + n - 1) % n];
    const Vec2& b = r[i];
    const Vec2& c = r[(i + 1) % n];
    const Vec2 ab = b - a, bc = c - b;
    const bool collinear = std::abs(cross2(ab, bc)) <= 1e-12 * ab.norm() * bc.norm() && dot2(ab, bc) > 0;
    if (!collinear) out.push_back(b);
  }
  return out.size() >= 3 ? out : r;
}

}  // namespace

std::vector<Ring2> alpha_shape_boundary(const std::vector<Vec2>& pts, double alpha) {
  const auto tris = delaunay_triangles(pts);
  if (tris.empty()) throw Error("degenerate region");

  std::map<std::pair<int, int>, int> directed;  // edge -> multiplicity
  for (const auto& t : tris) {
    if (circumradius(pts[t[0]], pts[t[1]], pts[t[2]]) > alpha) continue;
    for (int k = 0; k < 3; ++k) directed[{t[k], t[(k + 1) % 3]}]++;
  }
  std::map<int, std::vector<int>> out_edges;
  for (const auto& [e, cnt] : directed)
    if (!directed.count({e.second, e.first})) out_edges[e.first].push_back(e.second);

  std::map<std::pair<int, int>, bool> used;
  std::vector<Ring2> rings;
  for (const auto& [start, targets] : out_edges) {
    for (int first : targets) {
      if (used[{start, first}]) continue;
      std::vector<int> loop{start};
      int prev = start, cur = first;
      used[{start, first}] = true;
      while (cur != start) {
        loop.push_back(cur);
        const auto it = out_edges.find(cur);
        if (it == out_edges.end()) break;
        const Vec2 back = pts[prev] - pts[cur];
        const double a_back = std::atan2(back.y(), back.x());
        int best = -1;
        double best_turn = 0;
        for (int cand : it->second) {
          if (used[{cur, cand}]) continue;
          const Vec2 dir = pts[cand] - pts[cur];
          double turn = a_back - std::atan2(dir.y(), dir.x());
          while (turn <= 0) turn += 2 * std::numbers::pi;
          while (turn > 2 * std::numbers::pi) turn -= 2 * std::numbers::pi;
          if (best < 0 || turn < best_turn) {
            best = cand;
            best_turn = turn;
          }
        }
        if (best < 0) break;
        used[{cur, best}] = true;
        prev = cur;
        cur = best;
      }
      if (loop.size() < 3) continue;
      Ring2 r;
      for (int idx : loop) r.push_back(pts[idx]);
      r = drop_collinear(r);
      if (std::abs(ring_signed_area(r)) > 0) rings.push_back(std::move(r));
    }
  }
  return rings;
}

namespace {

namespace bgm = boost::geometry::model;
using BgPoint = bgm::d2::point_xy<double>;
using BgPolygon = bgm::polygon<BgPoint, false, false>;
using BgMulti = bgm::multi_polygon<BgPolygon>;

}  // namespace

std::vector<Ring2> dilate_rings(const std::vector<Ring2>& rings, double delta) {
  if (delta <= 0 || rings.empty()) return rings;
  namespace bg = boost::geometry;
  std::vector<std::size_t> outers;
  for (std::size_t r = 0; r < rings.size(); ++r)
    if (ring_signed_area(rings[r]) > 0) outers.push_back(r);
  BgMulti in;
  in.resize(outers.size());
  for (std::size_t k = 0; k < outers.size(); ++k)
    for (const auto& q : rings[outers[k]]) in[k].outer().emplace_back(q.x(), q.y());
  for (std::size_t r = 0; r < rings.size(); ++r) {
    if (ring_signed_area(rings[r]) > 0 || rings[r].empty()) continue;
    int best = -1;
    double best_area = 0;
    for (std::size_t k = 0; k < outers.size(); ++k) {
      const double a = ring_signed_area(rings[outers[k]]);
      if (winding_number(rings[outers[k]], rings[r].front()) != 0 && (best < 0 || a < best_area)) {
        best = static_cast<int>(k);
        best_area = a;
      }
    }
    if (best < 0) continue;
    in[best].inners().emplace_back();
    for (const auto& q : rings[r]) in[best].inners().back().emplace_back(q.x(), q.y());
  }
  BgMulti out;
  bg::buffer(in, out, bg::strategy::buffer::distance_symmetric<double>(delta),
             bg::strategy::buffer::side_straight(), bg::strategy::buffer::join_miter(2.0),
             bg::strategy::buffer::end_flat(), bg::strategy::buffer::point_square());
  if (out.empty()) return rings;
  auto convert = [](const auto& ring, bool ccw) {
    Ring2 r;
    for (const auto& p : ring) r.emplace_back(p.x(), p.y());
    if (r.size() > 1 && r.front() == r.back()) r.pop_back();
    if ((ring_signed_area(r) > 0) != ccw) std::reverse(r.begin(), r.end());
    return r;
  };
  std::vector<Ring2> res;
  for (const auto& poly : out) {
    res.push_back(convert(poly.outer(), true));
    for (const auto& hole : poly.inners()) res.push_back(convert(hole, false));
  }
  return res;
}

}  // namespace archlod
