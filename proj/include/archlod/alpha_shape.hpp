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

#include <array>

#include "archlod/geometry.hpp"

namespace archlod {

// Delaunay triangles of a 2D point set as CCW index triples. Duplicate
// points are collapsed onto their lowest index. Empty when all points are
// collinear.
std::vector<std::array<int, 3>> delaunay_triangles(const std::vector<Vec2>& pts);

// Boundary of the union of Delaunay triangles whose circumradius is at most
// alpha. Outer rings are CCW, holes CW. Throws "degenerate region" for
// collinear input; returns empty when no triangle survives.
std::vector<Ring2> alpha_shape_boundary(const std::vector<Vec2>& pts, double alpha);

// Outward offset of a polygon by delta with mitred corners. Holes are
// matched to the smallest enclosing outer ring.
std::vector<Ring2> dilate_rings(const std::vector<Ring2>& rings, double delta);

}  // namespace archlod
