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

#include "archlod/plane_detect.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

#include "archlod/alpha_shape.hpp"
#include "archlod/parallel.hpp"
#include "archlod/spatial_index.hpp"

namespace archlod {

namespace {

struct Pca {
  Vec3 centroid;
  Vec3 evals;  // ascending
  Mat3 evecs;
};

template <class Range>
Pca pca(const Range& pts) {
  Pca r;
  r.centroid.setZero();
  for (const Vec3& p : pts) r.centroid += p;
  r.centroid /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) {
    const Vec3 d = p - r.centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  r.evals = es.eigenvalues();
  r.evecs = es.eigenvectors();
  return r;
}

}  // namespace

Plane fit_plane(const std::vector<Vec3>& pts, double* rms) {
  if (pts.size() < 3) throw Error("degenerate region");
  const Pca p = pca(pts);
  Plane pl = Plane::through(p.evecs.col(0), p.centroid);
  if (rms) *rms = std::sqrt(std::max(0.0, p.evals(0)));
  return pl;
}

double mean_spacing(const std::vector<Vec3>& pts) {
  if (pts.size() < 2) return 0.0;
  PointIndex index(pts);
  double sum = 0.0;
  for (const auto& p : pts) {
    const auto nn = index.knn(p, 2);
    sum += (pts[nn.back()] - p).norm();
  }
  return sum / static_cast<double>(pts.size());
}

Footprint region_footprint(const Plane& plane, const std::vector<Vec3>& inlier_points, double alpha,
                           double margin) {
  if (inlier_points.size() < 3) throw Error("degenerate region");
  Vec3 c = Vec3::Zero();
  for (const auto& p : inlier_points) c += p;
  c /= static_cast<double>(inlier_points.size());
  Footprint fp;
  fp.frame = PlaneFrame::make(plane, c);
  std::vector<Vec2> local;
  local.reserve(inlier_points.size());
  for (const auto& p : inlier_points) local.push_back(fp.frame.to_local(p));
  fp.rings = dilate_rings(alpha_shape_boundary(local, alpha), margin);
  return fp;
}

double region_area(const PlaneRegion& region) { return polygon_area(region.footprint); }

std::vector<PlaneRegion> detect_planes(const PointCloud& cloud, const DetectParams& params) {
  cloud.validate();
  const auto& P = cloud.points;
  const auto& N = cloud.normals;
  const std::size_t n = P.size();
  const int k = std::max(3, params.knn);
  const double cos_thr = std::cos(params.angle_threshold * std::numbers::pi / 180.0);
  const double dthr = params.distance_threshold;

  PointIndex index(P);
  std::vector<std::vector<int>> nbrs(n);
  std::vector<double> residual(n, 0.0);
  std::vector<double> nn_dist(n, 0.0);
  parallel_for(n, params.threads, [&](std::size_t i) {
    auto nb = index.knn(P[i], k + 1);
    std::vector<Vec3> local;
    local.reserve(nb.size());
    for (int j : nb) local.push_back(P[j]);
    if (local.size() >= 3) {
      const Pca p = pca(local);
      const double tot = p.evals.sum();
      residual[i] = tot > 0 ? p.evals(0) / tot : 0.0;
    }
    nb.erase(std::remove(nb.begin(), nb.end(), static_cast<int>(i)), nb.end());
    if (!nb.empty()) nn_dist[i] = (P[nb.front()] - P[i]).norm();
    nbrs[i] = std::move(nb);
  });

  double alpha = params.alpha;
  if (alpha <= 0) {
    alpha = 4.0 * std::accumulate(nn_dist.begin(), nn_dist.end(), 0.0) / static_cast<double>(n);
    if (alpha <= 0) alpha = 1.0;
  }
  const double margin = params.footprint_margin >= 0
                            ? params.footprint_margin
                            : std::accumulate(nn_dist.begin(), nn_dist.end(), 0.0) / static_cast<double>(n);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return residual[a] < residual[b]; });

  std::vector<int> owner(n, -1);
  std::vector<char> tried(n, 0);
  std::vector<std::vector<int>> grown;

  auto fit_indices = [&](const std::vector<int>& idx) {
    std::vector<Vec3> pts;
    pts.reserve(idx.size());
    for (int i : idx) pts.push_back(P[i]);
    return fit_plane(pts);
  };

  for (int seed : order) {
    if (owner[seed] >= 0 || tried[seed]) continue;
    tried[seed] = 1;
    const int id = static_cast<int>(grown.size());
    Plane plane = Plane::through(N[seed], P[seed]);
    std::vector<int> region{seed};
    owner[seed] = id;
    std::size_t last_fit = 1;
    std::deque<int> queue{seed};
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      for (int q : nbrs[cur]) {
        if (owner[q] >= 0) continue;
        if (std::abs(dot3(N[q], plane.normal)) < cos_thr) continue;
        if (std::abs(plane.signed_distance(P[q])) > dthr) continue;
        owner[q] = id;
        region.push_back(q);
        queue.push_back(q);
      }
      if (region.size() >= 3 && region.size() >= 2 * last_fit) {
        Plane refit = fit_indices(region);
        if (dot3(refit.normal, plane.normal) < 0) {
          refit.normal = -refit.normal;
          refit.offset = -refit.offset;
        }
        plane = refit;
        last_fit = region.size();
      }
    }
    auto release = [&](const std::vector<int>& pts) {
      for (int i : pts) owner[i] = -1;
    };
    if (static_cast<int>(region.size()) < params.min_region_size) {
      release(region);
      continue;
    }
    // Refit and trim until every inlier lies within the threshold.
    for (;;) {
      plane = fit_indices(region);
      std::vector<int> keep, drop;
      for (int i : region) (std::abs(plane.signed_distance(P[i])) <= dthr ? keep : drop).push_back(i);
      if (drop.empty()) break;
      release(drop);
      region = std::move(keep);
      if (static_cast<int>(region.size()) < params.min_region_size) break;
    }
    if (static_cast<int>(region.size()) < params.min_region_size) {
      release(region);
      continue;
    }
    grown.push_back(std::move(region));
  }

  std::vector<PlaneRegion> regions(grown.size());
  std::vector<char> ok(grown.size(), 0);
  parallel_for(grown.size(), params.threads, [&](std::size_t r) {
    auto& idx = grown[r];
    std::sort(idx.begin(), idx.end());
    std::vector<Vec3> pts;
    pts.reserve(idx.size());
    for (int i : idx) pts.push_back(P[i]);
    Plane plane = fit_plane(pts);
    std::size_t agree = 0;
    for (int i : idx) agree += dot3(N[i], plane.normal) > 0;
    double frac = static_cast<double>(agree) / static_cast<double>(idx.size());
    if (frac < 0.5) {
      plane.normal = -plane.normal;
      plane.offset = -plane.offset;
      frac = 1.0 - frac;
    }
    Footprint fp;
    try {
      fp = region_footprint(plane, pts, alpha, margin);
    } catch (const Error&) {
      return;
    }
    if (fp.rings.empty()) return;
    PlaneRegion& reg = regions[r];
    reg.plane = plane;
    reg.frame = fp.frame;
    reg.footprint = std::move(fp.rings);
    reg.inliers = idx;
    reg.orientation_agreement = frac;
    reg.finalize();
    ok[r] = reg.area > 0;
  });

  std::vector<PlaneRegion> out;
  for (std::size_t r = 0; r < regions.size(); ++r)
    if (ok[r]) out.push_back(std::move(regions[r]));
  if (out.empty()) throw Error("no primary planes");
  std::stable_sort(out.begin(), out.end(), [](const PlaneRegion& a, const PlaneRegion& b) {
    if (a.area != b.area) return a.area > b.area;
    return a.inliers.front() < b.inliers.front();
  });
  return out;
}

}  // namespace archlod
