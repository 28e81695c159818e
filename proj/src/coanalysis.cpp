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

#include "archlod/coanalysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "archlod/parallel.hpp"

namespace archlod {

namespace {

struct Moments {
  Vec3 mean;
  Vec3 evals;  // descending
  Mat3 evecs;  // columns match evals
};

Moments moments(const std::vector<Vec3>& pts) {
  Moments m;
  m.mean.setZero();
  for (const auto& p : pts) m.mean += p;
  m.mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - m.mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  for (int k = 0; k < 3; ++k) {
    m.evals(k) = std::max(0.0, es.eigenvalues()(2 - k));
    m.evecs.col(k) = es.eigenvectors().col(2 - k);
  }
  return m;
}

}  // namespace

std::vector<Vec3> normalize_segment(const std::vector<Vec3>& pts) {
  if (pts.size() < 10) throw Error("segment too sparse");
  const Moments m = moments(pts);
  Vec3 scale;
  for (int k = 0; k < 3; ++k)
    scale(k) = (m.evals(0) > 0 && m.evals(k) >= 1e-9 * m.evals(0)) ? 1.0 / std::sqrt(m.evals(k)) : 1.0;
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back((m.evecs.transpose() * (p - m.mean)).cwiseProduct(scale));
  return out;
}

Vec3 principal_eigenvalues(const std::vector<Vec3>& pts) {
  if (pts.empty()) return Vec3::Zero();
  return moments(pts).evals;
}

std::vector<double> d2_descriptor(const std::vector<Vec3>& pts, int bins, int pairs, uint64_t seed) {
  if (pts.size() < 2) throw Error("d2 descriptor needs at least two points");
  if (bins < 1 || pairs < 1) throw Error("d2 descriptor needs positive bins and pairs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::vector<double> d(pairs);
  double dmax = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const std::size_t a = pick(rng), b = pick(rng);
    d[i] = (pts[a] - pts[b]).norm();
    dmax = std::max(dmax, d[i]);
  }
  std::vector<double> h(bins, 0.0);
  for (double v : d) {
    int k = dmax > 0 ? static_cast<int>(v / dmax * bins) : 0;
    h[std::clamp(k, 0, bins - 1)] += 1.0;
  }
  for (double& v : h) v /= static_cast<double>(pairs);
  return h;
}

SegmentDescriptor describe_points(const std::vector<Vec3>& pts, const CoParams& params, uint64_t seed) {
  SegmentDescriptor s;
  s.d2 = d2_descriptor(normalize_segment(pts), params.d2_bins, params.d2_pairs, seed);
  s.eigenvalues = principal_eigenvalues(pts);
  return s;
}

std::vector<Vec3> sample_segment_surface(const Segment& seg, const std::vector<PlaneRegion>& regions,
                                         int count, uint64_t seed) {
  std::vector<double> area;
  double total = 0;
  for (int p : seg.planes) {
    area.push_back(regions[p].area);
    total += regions[p].area;
  }
  std::vector<Vec3> out;
  if (total <= 0 || count <= 0) return out;
  // Largest-remainder allocation of the sample budget.
  std::vector<int> alloc(area.size());
  std::vector<std::pair<double, std::size_t>> rem;
  int used = 0;
  for (std::size_t i = 0; i < area.size(); ++i) {
    const double want = count * area[i] / total;
    alloc[i] = static_cast<int>(std::floor(want));
    used += alloc[i];
    rem.emplace_back(-(want - alloc[i]), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t i = 0; used < count && i < rem.size(); ++i, ++used) alloc[rem[i].second]++;

  for (std::size_t i = 0; i < seg.planes.size(); ++i) {
    const PlaneRegion& r = regions[seg.planes[i]];
    std::mt19937_64 rng(seed * 2654435761ULL + static_cast<uint64_t>(seg.planes[i]) * 97 + 1);
    std::uniform_real_distribution<double> ux(r.bounds2d.min.x(), r.bounds2d.max.x());
    std::uniform_real_distribution<double> uy(r.bounds2d.min.y(), r.bounds2d.max.y());
    int got = 0;
    long tries = 0;
    while (got < alloc[i] && tries < 1000L * alloc[i] + 1000) {
      ++tries;
      const Vec2 q(ux(rng), uy(rng));
      if (!point_in_polygon(r.footprint, q, 0.0)) continue;
      out.push_back(r.frame.to_world(q));
      ++got;
    }
  }
  return out;
}

double shape_distance(const SegmentDescriptor& a, const SegmentDescriptor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.d2.size(); ++i) s += (a.d2[i] - b.d2[i]) * (a.d2[i] - b.d2[i]);
  return std::sqrt(s);
}

double scale_distance(const SegmentDescriptor& a, const SegmentDescriptor& b) {
  const double den = a.eigenvalues.lpNorm<1>() + b.eigenvalues.lpNorm<1>();
  return den > 0 ? (a.eigenvalues - b.eigenvalues).lpNorm<1>() / den : 0.0;
}

double segment_distance(const SegmentDescriptor& a, const SegmentDescriptor& b, double eta) {
  return eta * shape_distance(a, b) + scale_distance(a, b);
}

double cross_similarity(const std::vector<double>& distances_to_set) {
  if (distances_to_set.empty()) return 0.0;
  return std::exp(-*std::min_element(distances_to_set.begin(), distances_to_set.end()));
}

CoBuilding make_co_building(const std::string& name, const std::vector<Segment>& segs,
                            const std::vector<PlaneRegion>& regions, int first_global) {
  CoBuilding b;
  b.name = name;
  std::vector<std::pair<uint32_t, int>> cover;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    b.global.push_back(first_global + static_cast<int>(s));
    double a = 0;
    for (int p : segs[s].planes) a += regions[p].area;
    b.area.push_back(a);
    b.total_area += a;
    for (uint32_t v : segs[s].voxels) cover.emplace_back(v, static_cast<int>(s));
  }
  std::sort(cover.begin(), cover.end());
  std::map<std::vector<int>, long> atoms;
  std::vector<int> sig;
  for (std::size_t i = 0; i < cover.size();) {
    std::size_t j = i;
    sig.clear();
    while (j < cover.size() && cover[j].first == cover[i].first) sig.push_back(cover[j++].second);
    atoms[sig]++;
    i = j;
  }
  for (const auto& [members, size] : atoms) {
    b.atom_members.push_back(members);
    b.atom_size.push_back(size);
    b.total_voxels += size;
  }
  return b;
}

double fidelity_term(const CoBuilding& b, const std::vector<char>& keep) {
  if (b.total_voxels == 0) return 0.0;
  long covered = 0;
  for (std::size_t a = 0; a < b.atom_size.size(); ++a)
    for (int s : b.atom_members[a])
      if (keep[s]) {
        covered += b.atom_size[a];
        break;
      }
  return static_cast<double>(covered) / static_cast<double>(b.total_voxels);
}

double simplicity_term(const CoBuilding& b, const std::vector<char>& keep) {
  if (b.total_area <= 0) return 0.0;
  double a = 0;
  for (std::size_t s = 0; s < b.size(); ++s)
    if (keep[s]) a += b.area[s];
  return -a / b.total_area;
}

namespace {

// Sim_co of global segment g against the removed set of building j.
double sim_to_removed(const CollectionContext& ctx, const Selection& sel, int g, std::size_t j) {
  std::vector<double> d;
  const CoBuilding& bj = ctx.buildings[j];
  for (std::size_t s = 0; s < bj.size(); ++s)
    if (!sel[j][s]) d.push_back(ctx.distance(g, bj.global[s]));
  return cross_similarity(d);
}

}  // namespace

double consistency_term(const CollectionContext& ctx, const Selection& sel, std::size_t i) {
  double sum = 0;
  const CoBuilding& b = ctx.buildings[i];
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (sel[i][s]) continue;
    for (std::size_t j = 0; j < ctx.buildings.size(); ++j)
      if (j != i) sum += sim_to_removed(ctx, sel, b.global[s], j);
  }
  return sum;
}

bool feasible(const CoBuilding& b, const std::vector<char>& keep, double floor) {
  if (std::none_of(keep.begin(), keep.end(), [](char c) { return c != 0; })) return false;
  return fidelity_term(b, keep) > floor;
}

double energy(const CollectionContext& ctx, const Selection& sel, const CoParams& params) {
  double e = 0;
  for (std::size_t i = 0; i < ctx.buildings.size(); ++i)
    e += fidelity_term(ctx.buildings[i], sel[i]) + params.beta * simplicity_term(ctx.buildings[i], sel[i]) +
         params.lambda * consistency_term(ctx, sel, i);
  return e;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Objective of one building's removal choice with all other buildings fixed,
// up to an additive constant.
struct BlockProblem {
  const CoBuilding* b = nullptr;
  std::vector<double> own;                 // per local segment
  std::vector<std::vector<double>> wsort;  // per foreign removed segment: weights sorted desc
  std::vector<std::vector<int>> worder;    // matching local ids
  double beta = 0, lambda = 0, floor = 0;

  double value(const std::vector<char>& keep) const {
    if (!feasible(*b, keep, floor)) return kNegInf;
    double g = fidelity_term(*b, keep) + beta * simplicity_term(*b, keep);
    double co = 0;
    for (std::size_t s = 0; s < keep.size(); ++s)
      if (!keep[s]) co += own[s];
    for (std::size_t f = 0; f < wsort.size(); ++f)
      for (std::size_t k = 0; k < worder[f].size(); ++k)
        if (!keep[worder[f][k]]) {
          co += wsort[f][k];
          break;
        }
    return g + lambda * co;
  }
};

BlockProblem make_block(const CollectionContext& ctx, const Selection& sel, std::size_t i,
                        const CoParams& params, bool optimistic) {
  BlockProblem bp;
  const CoBuilding& b = ctx.buildings[i];
  bp.b = &b;
  bp.beta = params.beta;
  bp.lambda = params.lambda;
  bp.floor = params.fidelity_floor;
  bp.own.assign(b.size(), 0.0);
  for (std::size_t j = 0; j < ctx.buildings.size(); ++j) {
    if (j == i) continue;
    const CoBuilding& bj = ctx.buildings[j];
    std::vector<int> removed;
    for (std::size_t s = 0; s < bj.size(); ++s)
      if (optimistic || !sel[j][s]) removed.push_back(bj.global[s]);
    if (removed.empty()) continue;
    for (std::size_t s = 0; s < b.size(); ++s) {
      std::vector<double> d;
      for (int g : removed) d.push_back(ctx.distance(b.global[s], g));
      bp.own[s] += cross_similarity(d);
    }
    for (int g : removed) {
      std::vector<std::pair<double, int>> w;
      for (std::size_t s = 0; s < b.size(); ++s)
        w.emplace_back(-std::exp(-ctx.distance(g, b.global[s])), static_cast<int>(s));
      std::sort(w.begin(), w.end());
      std::vector<double> ws;
      std::vector<int> wo;
      for (const auto& [neg, s] : w) {
        ws.push_back(-neg);
        wo.push_back(s);
      }
      bp.wsort.push_back(std::move(ws));
      bp.worder.push_back(std::move(wo));
    }
  }
  return bp;
}

std::vector<char> enumerate_block(const BlockProblem& bp, double* best_value) {
  const std::size_t n = bp.b->size();
  std::vector<char> best(n, 1), keep(n);
  double bv = kNegInf;
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    for (std::size_t s = 0; s < n; ++s) keep[s] = !((mask >> s) & 1);
    const double v = bp.value(keep);
    if (v > bv) {
      bv = v;
      best = keep;
    }
  }
  *best_value = bv;
  return best;
}

std::vector<char> branch_and_bound_block(const BlockProblem& bp, double* best_value) {
  const CoBuilding& b = *bp.b;
  const std::size_t n = b.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return b.area[x] > b.area[y]; });
  // state: 1 keep, 0 remove, -1 undecided
  std::vector<signed char> state(n, -1);
  std::vector<char> best(n, 1);
  double bv = bp.value(best);

  auto bound = [&]() {
    std::vector<char> optimistic_keep(n), optimistic_remove(n);
    for (std::size_t s = 0; s < n; ++s) {
      optimistic_keep[s] = state[s] != 0;
      optimistic_remove[s] = state[s] == 1;
    }
    if (std::none_of(optimistic_keep.begin(), optimistic_keep.end(), [](char c) { return c != 0; }))
      return kNegInf;
    const double fr = fidelity_term(b, optimistic_keep);
    if (!(fr > bp.floor)) return kNegInf;
    double ub = fr + bp.beta * simplicity_term(b, optimistic_remove);
    double co = 0;
    for (std::size_t s = 0; s < n; ++s)
      if (state[s] != 1) co += bp.own[s];
    for (std::size_t f = 0; f < bp.wsort.size(); ++f)
      for (std::size_t k = 0; k < bp.worder[f].size(); ++k)
        if (state[bp.worder[f][k]] != 1) {
          co += bp.wsort[f][k];
          break;
        }
    return ub + bp.lambda * co;
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
    if (bound() <= bv) return;
    if (depth == n) {
      std::vector<char> keep(n);
      for (std::size_t s = 0; s < n; ++s) keep[s] = state[s] == 1;
      const double v = bp.value(keep);
      if (v > bv) {
        bv = v;
        best = keep;
      }
      return;
    }
    const int s = order[depth];
    for (signed char choice : {static_cast<signed char>(1), static_cast<signed char>(0)}) {
      state[s] = choice;
      dfs(depth + 1);
    }
    state[s] = -1;
  };
  dfs(0);
  *best_value = bv;
  return best;
}

std::vector<char> solve_block(const BlockProblem& bp, const SolverOptions& opts, double* value) {
  if (static_cast<int>(bp.b->size()) <= opts.enumerate_limit) return enumerate_block(bp, value);
  return branch_and_bound_block(bp, value);
}

Selection ascend(const CollectionContext& ctx, Selection sel, const CoParams& params,
                 const SolverOptions& opts) {
  for (int sweep = 0; sweep < std::max(1, params.max_sweeps); ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < ctx.buildings.size(); ++i) {
      const BlockProblem bp = make_block(ctx, sel, i, params, false);
      double v = kNegInf;
      auto cand = solve_block(bp, opts, &v);
      if (v > bp.value(sel[i]) + 1e-12) {
        sel[i] = std::move(cand);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return sel;
}

}  // namespace

Selection optimize_lod0(const CollectionContext& ctx, const CoParams& params, double* e0,
                        const SolverOptions& opts) {
  if (ctx.buildings.empty()) throw Error("co-analysis needs at least one building");
  Selection all_kept;
  for (const auto& b : ctx.buildings) {
    if (b.size() == 0) throw Error("building " + b.name + " has no segments");
    std::vector<char> keep(b.size(), 1);
    if (!feasible(b, keep, params.fidelity_floor))
      throw Error("no LOD0 selection of building " + b.name + " reaches the fidelity floor");
    all_kept.push_back(keep);
  }
  Selection best = ascend(ctx, all_kept, params, opts);
  double best_e = energy(ctx, best, params);
  if (opts.multi_start && ctx.buildings.size() > 1) {
    Selection start;
    for (std::size_t i = 0; i < ctx.buildings.size(); ++i) {
      const BlockProblem bp = make_block(ctx, all_kept, i, params, true);
      double v = kNegInf;
      start.push_back(solve_block(bp, opts, &v));
    }
    Selection alt = ascend(ctx, start, params, opts);
    const double alt_e = energy(ctx, alt, params);
    if (alt_e > best_e + 1e-12) {
      best = std::move(alt);
      best_e = alt_e;
    }
  }
  if (e0) *e0 = best_e;
  return best;
}

Selection optimize_exhaustive(const CollectionContext& ctx, const CoParams& params, double* e0) {
  std::size_t total = 0;
  for (const auto& b : ctx.buildings) total += b.size();
  if (total > 24) throw Error("collection too large for exhaustive enumeration");
  Selection sel;
  for (const auto& b : ctx.buildings) sel.emplace_back(b.size(), 1);
  Selection best = sel;
  double bv = kNegInf;
  for (uint64_t mask = 0; mask < (uint64_t{1} << total); ++mask) {
    std::size_t bit = 0;
    bool ok = true;
    for (std::size_t i = 0; i < ctx.buildings.size(); ++i) {
      for (std::size_t s = 0; s < ctx.buildings[i].size(); ++s, ++bit) sel[i][s] = !((mask >> bit) & 1);
      ok = ok && feasible(ctx.buildings[i], sel[i], params.fidelity_floor);
    }
    if (!ok) continue;
    const double e = energy(ctx, sel, params);
    if (e > bv) {
      bv = e;
      best = sel;
    }
  }
  if (e0) *e0 = bv;
  return best;
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& S) {
  const Eigen::VectorXd d = S.rowwise().sum();
  const Eigen::VectorXd dis = d.array().max(1e-300).rsqrt();
  Eigen::MatrixXd L = -(dis.asDiagonal() * S * dis.asDiagonal());
  L.diagonal().array() += 1.0;
  return 0.5 * (L + L.transpose());
}

namespace {

std::vector<int> kmeans(const Eigen::MatrixXd& X, int k, uint64_t seed) {
  const int m = static_cast<int>(X.rows());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<int> centers_idx{pick(rng)};
  std::vector<double> mind(m, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers_idx.size()) < k) {
    const int c = centers_idx.back();
    int far = 0;
    for (int i = 0; i < m; ++i) {
      mind[i] = std::min(mind[i], (X.row(i) - X.row(c)).squaredNorm());
      if (mind[i] > mind[far]) far = i;
    }
    centers_idx.push_back(far);
  }
  Eigen::MatrixXd C(k, X.cols());
  for (int c = 0; c < k; ++c) C.row(c) = X.row(centers_idx[c]);
  std::vector<int> label(m, -1);
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (X.row(i) - C.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<int> cnt(k, 0);
    for (int i = 0; i < m; ++i) {
      sum.row(label[i]) += X.row(i);
      cnt[label[i]]++;
    }
    for (int c = 0; c < k; ++c)
      if (cnt[c] > 0) C.row(c) = sum.row(c) / cnt[c];
  }
  // Canonical numbering by first appearance.
  std::map<int, int> remap;
  for (int& l : label) {
    auto [it, fresh] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return label;
}

}  // namespace

std::vector<int> spectral_clusters(const Eigen::MatrixXd& similarity, int k, uint64_t seed) {
  const int m = static_cast<int>(similarity.rows());
  if (m == 0) return {};
  if (k <= 1 || m < k) return std::vector<int>(m, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized_laplacian(similarity));
  const Eigen::MatrixXd U = es.eigenvectors().leftCols(k);
  return kmeans(U, k, seed);
}

std::vector<int> spectral_layers(const Eigen::MatrixXd& similarity, const std::vector<double>& volumes,
                                 int l_n, uint64_t seed, std::string* warning) {
  const int m = static_cast<int>(similarity.rows());
  const int k = l_n - 1;
  if (m == 0) return {};
  if (k > 1 && m < k) {
    if (warning) *warning = "fewer segments than clusters; all assigned to layer 1";
    return std::vector<int>(m, 1);
  }
  const auto cl = spectral_clusters(similarity, k, seed);
  const int nc = cl.empty() ? 0 : *std::max_element(cl.begin(), cl.end()) + 1;
  std::vector<double> vol(nc, 0.0);
  std::vector<int> cnt(nc, 0);
  for (int i = 0; i < m; ++i) {
    vol[cl[i]] += volumes[i];
    cnt[cl[i]]++;
  }
  std::vector<int> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return vol[a] / cnt[a] > vol[b] / cnt[b]; });
  std::vector<int> rank(nc);
  for (int r = 0; r < nc; ++r) rank[order[r]] = r;
  std::vector<int> layer(m);
  for (int i = 0; i < m; ++i) layer[i] = 1 + rank[cl[i]];
  return layer;
}

double point_region_distance(const Vec3& p, const PlaneRegion& r) {
  const double h = r.plane.signed_distance(p);
  const Vec2 q = r.frame.to_local(p);
  if (point_in_polygon(r.footprint, q, 0.0)) return std::abs(h);
  const double b = polygon_boundary_distance(r.footprint, q);
  return std::sqrt(h * h + b * b);
}

double footprint_distance(const PlaneRegion& a, const PlaneRegion& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : a.footprint)
    for (const auto& q : ring) best = std::min(best, point_region_distance(a.frame.to_world(q), b));
  for (const auto& ring : b.footprint)
    for (const auto& q : ring) best = std::min(best, point_region_distance(b.frame.to_world(q), a));
  return best;
}

std::vector<int> layer_planes(const std::vector<Segment>& segs, const std::vector<int>& layers, int k,
                              const std::vector<PlaneRegion>& regions, double eps) {
  std::vector<char> segmented(regions.size(), 0), included(regions.size(), 0);
  for (std::size_t s = 0; s < segs.size(); ++s)
    for (int p : segs[s].planes) {
      segmented[p] = 1;
      if (layers[s] <= k) included[p] = 1;
    }
  std::vector<int> out;
  for (std::size_t p = 0; p < regions.size(); ++p)
    if (included[p]) out.push_back(static_cast<int>(p));
  std::vector<int> base = out;
  for (std::size_t o = 0; o < regions.size(); ++o) {
    if (segmented[o]) continue;
    const AABB ob = regions[o].bounds3d.inflated(0.0);
    for (int p : base) {
      const AABB& pb = regions[p].bounds3d;
      const Vec3 gap = (ob.min - pb.max).cwiseMax(pb.min - ob.max).cwiseMax(0.0);
      if (gap.norm() > eps) continue;
      if (footprint_distance(regions[o], regions[p]) <= eps) {
        out.push_back(static_cast<int>(o));
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CoResult coanalyze(const std::vector<CoInput>& inputs, const CoParams& params) {
  if (params.l_n < 2) throw Error("l_n must be at least 2");
  CoResult res;
  CollectionContext ctx;
  std::vector<const Segment*> segs;
  std::vector<const std::vector<PlaneRegion>*> seg_regions;
  std::vector<double> volumes;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    ctx.buildings.push_back(
        make_co_building(inputs[b].name, *inputs[b].segments, *inputs[b].regions, static_cast<int>(segs.size())));
    for (std::size_t s = 0; s < inputs[b].segments->size(); ++s) {
      segs.push_back(&(*inputs[b].segments)[s]);
      seg_regions.push_back(inputs[b].regions);
      res.global_ids.emplace_back(static_cast<int>(b), static_cast<int>(s));
      volumes.push_back(static_cast<double>((*inputs[b].segments)[s].voxels.size()) *
                        inputs[b].grid.voxel_volume());
    }
  }
  const std::size_t G = segs.size();
  std::vector<SegmentDescriptor> desc(G);
  parallel_for(G, params.threads, [&](std::size_t g) {
    const auto pts = sample_segment_surface(*segs[g], *seg_regions[g], params.samples_per_segment,
                                            params.seed + 1000 * (g + 1));
    desc[g] = describe_points(pts, params, params.seed + g);
  });
  ctx.distance = Eigen::MatrixXd::Zero(G, G);
  parallel_for(G, params.threads, [&](std::size_t a) {
    for (std::size_t b = a + 1; b < G; ++b) ctx.distance(a, b) = segment_distance(desc[a], desc[b], params.eta);
  });
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = a + 1; b < G; ++b) ctx.distance(b, a) = ctx.distance(a, b);
  res.similarity = ctx.similarity();

  res.lod0 = optimize_lod0(ctx, params, &res.energy);
  for (std::size_t b = 0; b < ctx.buildings.size(); ++b)
    res.fidelity.push_back(fidelity_term(ctx.buildings[b], res.lod0[b]));

  std::vector<int> beyond;
  for (std::size_t g = 0; g < G; ++g) {
    const auto [b, s] = res.global_ids[g];
    if (!res.lod0[b][s]) beyond.push_back(static_cast<int>(g));
  }
  Eigen::MatrixXd S(beyond.size(), beyond.size());
  std::vector<double> vol;
  for (std::size_t i = 0; i < beyond.size(); ++i) {
    vol.push_back(volumes[beyond[i]]);
    for (std::size_t j = 0; j < beyond.size(); ++j) S(i, j) = res.similarity(beyond[i], beyond[j]);
  }
  std::string warning;
  const auto lay = spectral_layers(S, vol, params.l_n, params.seed, &warning);
  if (!warning.empty()) res.warnings.push_back(warning);

  res.layers.resize(inputs.size());
  for (std::size_t b = 0; b < inputs.size(); ++b) res.layers[b].assign(inputs[b].segments->size(), 0);
  for (std::size_t i = 0; i < beyond.size(); ++i) {
    const auto [b, s] = res.global_ids[beyond[i]];
    res.layers[b][s] = lay[i];
  }
  return res;
}

std::string similarity_csv(const CoResult& result, const std::vector<std::string>& building_names) {
  std::vector<std::string> label;
  for (const auto& [b, s] : result.global_ids)
    label.push_back((b < static_cast<int>(building_names.size()) ? building_names[b] : std::to_string(b)) + "#" +
                    std::to_string(s));
  std::ostringstream out;
  out << std::setprecision(6) << "segment";
  for (const auto& l : label) out << ',' << l;
  out << '\n';
  for (std::size_t a = 0; a < label.size(); ++a) {
    out << label[a];
    for (std::size_t b = 0; b < label.size(); ++b) out << ',' << result.similarity(a, b);
    out << '\n';
  }
  return out.str();
}

}  // namespace archlod
