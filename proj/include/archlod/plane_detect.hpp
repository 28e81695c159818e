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

#include "archlod/geometry.hpp"

namespace archlod {

struct DetectParams {
  double distance_threshold = 0.2;  // meters
  double angle_threshold = 30.0;    // degrees
  int min_region_size = 20;
  double alpha = 0.0;  // meters; <= 0 selects 4x the mean nearest-neighbour spacing
  // Outward growth of each footprint, closing the gap between the outermost
  // inliers and the true edge; < 0 selects the mean nearest-neighbour spacing.
  double footprint_margin = -1.0;
  int knn = 16;
  int threads = 1;
};

struct Footprint {
  PlaneFrame frame;
  std::vector<Ring2> rings;
};

// Least-squares plane through the points (PCA). `rms` receives the RMS
// residual when non-null.
Plane fit_plane(const std::vector<Vec3>& pts, double* rms = nullptr);

// Mean distance from each point to its nearest other point.
double mean_spacing(const std::vector<Vec3>& pts);

// Alpha-shape boundary of inliers projected into the plane.
Footprint region_footprint(const Plane& plane, const std::vector<Vec3>& inlier_points, double alpha,
                           double margin = 0.0);

double region_area(const PlaneRegion& region);

// Region growing over the k-NN graph. Regions are sorted by descending area;
// orientation_agreement records the fraction of inlier normals agreeing with
// the plane normal.
std::vector<PlaneRegion> detect_planes(const PointCloud& cloud, const DetectParams& params);

}  // namespace archlod
