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

#include <memory>
#include <utility>

#include "archlod/common.hpp"

namespace archlod {

// Static nearest-neighbour index over 3D points (R-tree, bulk loaded).
class PointIndex {
 public:
  explicit PointIndex(const std::vector<Vec3>& points);
  ~PointIndex();
  PointIndex(PointIndex&&) noexcept;
  PointIndex& operator=(PointIndex&&) noexcept;

  // k nearest points ordered by distance, ties by index.
  std::vector<int> knn(const Vec3& q, int k) const;
  // Index and distance of the nearest point.
  std::pair<int, double> nearest(const Vec3& q) const;
  std::size_t size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
  const std::vector<Vec3>* points_ = nullptr;
};

}  // namespace archlod
