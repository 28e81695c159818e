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

#include "archlod/spatial_index.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace archlod {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using Entry = std::pair<BPoint, int>;

struct PointIndex::Impl {
  bgi::rtree<Entry, bgi::rstar<16>> tree;
};

PointIndex::PointIndex(const std::vector<Vec3>& points) : impl_(std::make_unique<Impl>()) {
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    entries.emplace_back(BPoint(points[i].x(), points[i].y(), points[i].z()), static_cast<int>(i));
  impl_->tree = bgi::rtree<Entry, bgi::rstar<16>>(entries.begin(), entries.end());
  n_ = points.size();
  points_ = &points;
}

PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

std::vector<int> PointIndex::knn(const Vec3& q, int k) const {
  std::vector<Entry> found;
  const BPoint bq(q.x(), q.y(), q.z());
  impl_->tree.query(bgi::nearest(bq, static_cast<unsigned>(k)), std::back_inserter(found));
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(found.size());
  for (const auto& e : found) ranked.emplace_back(bg::comparable_distance(e.first, bq), e.second);
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.second);
  return out;
}

std::pair<int, double> PointIndex::nearest(const Vec3& q) const {
  std::vector<Entry> found;
  const BPoint bq(q.x(), q.y(), q.z());
  impl_->tree.query(bgi::nearest(bq, 1u), std::back_inserter(found));
  if (found.empty()) return {-1, std::numeric_limits<double>::infinity()};
  return {found.front().second, bg::distance(found.front().first, bq)};
}

}  // namespace archlod
