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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "../support.hpp"
#include "archlod/metrics.hpp"
#include "archlod/plane_detect.hpp"
#include "archlod/segments.hpp"
#include "archlod/synth.hpp"

using namespace archlod;
using archlod::testing::box_regions;

namespace {

using Hits = std::vector<std::pair<int, int>>;

// Sparse field over a 4x4x4 grid from explicit hit lists.
VoxelField make_field(const std::map<uint32_t, Hits>& voxels, int n_p, int n_r = 100) {
  VoxelField f;
  AABB box;
  box.extend(Vec3(0, 0, 0));
  box.extend(Vec3(4, 4, 4));
  f.grid = VoxelGrid::over(box, 4);
  f.n_p = n_p;
  f.n_r = n_r;
  for (const auto& [v, hits] : voxels) {
    f.voxels.push_back(v);
    for (const auto& [p, c] : hits)
      f.entries.push_back(HitEntry{static_cast<uint16_t>(p), static_cast<uint16_t>(c)});
    f.offsets.push_back(static_cast<uint32_t>(f.entries.size()));
  }
  return f;
}

Segment seg_with(std::vector<int> planes, std::vector<std::pair<int, long>> hits) {
  Segment s;
  s.planes = std::move(planes);
  s.plane_hits = std::move(hits);
  s.voxels = {0};
  return s;
}

std::set<std::vector<int>> plane_partition(const std::vector<Segment>& segs) {
  std::set<std::vector<int>> out;
  for (const auto& s : segs) out.insert(s.planes);
  return out;
}

std::vector<PlaneRegion> detected(const std::string& name) {
  const Scene s = generate(fixture(name));
  return detect_planes(s.buildings[0].cloud, DetectParams{});
}

}  // namespace

TEST(HSum, Examples) {
  const VoxelField f = make_field({{0, {{0, 50}, {1, 30}}}, {1, {{0, 10}}}, {2, {{0, 10}}}}, 2);
  EXPECT_EQ(hsum({0, 1}, {0}, f), 80);
  EXPECT_EQ(hsum({}, {0}, f), 0);
  EXPECT_EQ(hsum({0}, {1, 2}, f), 20);
}

TEST(CanMerge, IdenticalGroups) {
  const VoxelField f = make_field({{0, {{0, 30}, {1, 30}}}, {1, {{0, 20}, {1, 40}}}}, 2);
  EXPECT_TRUE(can_merge(PlaneGroup{{0, 1}, {0}}, PlaneGroup{{0, 1}, {1}}, f));
}

TEST(CanMerge, DisjointPlaneSets) {
  const VoxelField f = make_field({{0, {{0, 60}}}, {1, {{1, 60}}}}, 2);
  EXPECT_FALSE(can_merge(PlaneGroup{{0}, {0}}, PlaneGroup{{1}, {1}}, f));
}

TEST(CanMerge, ExactlyHalfIsRejected) {
  const VoxelField f = make_field({{0, {{0, 30}, {1, 30}}}, {1, {{1, 40}, {2, 10}}}}, 3);
  // Intersection {1} carries 30 of g_a's 60 hits: not strictly more than half.
  EXPECT_FALSE(can_merge(PlaneGroup{{0, 1}, {0}}, PlaneGroup{{1, 2}, {1}}, f));
  const VoxelField g = make_field({{0, {{0, 29}, {1, 31}}}, {1, {{1, 40}, {2, 10}}}}, 3);
  EXPECT_TRUE(can_merge(PlaneGroup{{0, 1}, {0}}, PlaneGroup{{1, 2}, {1}}, g));
}

TEST(CanMerge, NegligiblePlanesDoNotVouch) {
  // A large node that absorbed a few hits on plane 2, and a cavity dominated
  // by plane 2 that sees plane 0 only through grazing rays.
  const VoxelField f = make_field({{0, {{0, 5000}, {1, 5000}, {2, 20}}}, {1, {{0, 10}, {2, 1000}}}}, 3);
  const PlaneGroup a{{0, 1, 2}, {0}}, b{{0, 2}, {1}};
  EXPECT_FALSE(can_merge(a, b, f));
  EXPECT_TRUE(can_merge(a, b, f, 0.5, 0.0));
}

TEST(Aggregate, SingleGroupIsItself) {
  const VoxelField f = make_field({{0, {{0, 60}}}, {1, {{0, 60}}}}, 1);
  const auto segs = aggregate({PlaneGroup{{0}, {0, 1}}}, f);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].planes, std::vector<int>{0});
  EXPECT_EQ(segs[0].voxels, (std::vector<uint32_t>{0, 1}));
  EXPECT_EQ(segs[0].hits_on(0), 120);
}

TEST(Aggregate, MergesOnlyAdjacentGroups) {
  // Voxels 0 and 1 are neighbours; voxel 63 is the far corner.
  const VoxelField f = make_field({{0, {{0, 60}}}, {1, {{0, 60}}}, {63, {{0, 60}}}}, 1);
  const auto segs = aggregate({PlaneGroup{{0}, {0}}, PlaneGroup{{0}, {1}}, PlaneGroup{{0}, {63}}}, f);
  EXPECT_EQ(segs.size(), 2u);
}

TEST(Aggregate, HollowBoxIsOneSegment) {
  const auto regions = box_regions(Vec3(0, 0, 0), Vec3(10, 10, 10));
  VisParams vp;
  vp.n_s = 20;
  const VoxelField f = build_field(regions, make_grid(regions, vp.n_s), vp);
  const auto segs = aggregate(form_plane_groups(f), f);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].voxels.size(), f.size());
}

TEST(AssignPlanes, Examples) {
  auto out = assign_planes({seg_with({0, 1}, {{0, 10}, {1, 5}})});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].planes, (std::vector<int>{0, 1}));

  out = assign_planes({seg_with({0, 1}, {{0, 10}, {1, 120}}), seg_with({1, 2}, {{1, 40}, {2, 50}})});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].planes, (std::vector<int>{0, 1}));
  EXPECT_EQ(out[1].planes, (std::vector<int>{2}));

  out = assign_planes({seg_with({0, 1}, {{0, 10}, {1, 40}}), seg_with({1, 2}, {{1, 40}, {2, 50}})});
  EXPECT_EQ(out[0].planes, (std::vector<int>{0, 1}));  // tie goes to the lower segment

  out = assign_planes({seg_with({1}, {{1, 10}}), seg_with({1, 2}, {{1, 40}, {2, 50}})});
  ASSERT_EQ(out.size(), 1u);  // emptied segment dropped
  EXPECT_EQ(out[0].planes, (std::vector<int>{1, 2}));
}

TEST(GenerateSegments, ClosedBox) {
  const auto regions = box_regions(Vec3(0, 0, 0), Vec3(10, 10, 10));
  VisParams vp;
  vp.n_s = 30;
  const auto s = generate_segments(regions, AggParams{}, vp);
  EXPECT_EQ(s.alcove_count, 0);
  EXPECT_EQ(s.reversed_planes, 0);
  ASSERT_EQ(s.segments.size(), 1u);
  EXPECT_EQ(s.segments[0].kind, SegmentKind::Closed);
}

TEST(GenerateSegments, RecessedDoorwayGivesAlcove) {
  const Scene sc = generate(fixture("alcove-box"));
  const auto regions = detect_planes(sc.buildings[0].cloud, DetectParams{});
  VisParams vp;
  vp.n_s = 80;
  const auto s = generate_segments(regions, AggParams{}, vp);
  ASSERT_GE(s.alcove_count, 1);
  int closed = 0;
  for (const auto& seg : s.segments) closed += seg.kind == SegmentKind::Closed;
  EXPECT_GE(closed, 1);
  // The alcove's planes are the doorway's small walls.
  const auto mapping = map_to_truth(regions, sc.buildings[0].truth);
  const auto& door = sc.buildings[0].truth.segments[1];
  std::vector<int> found;
  for (int p : s.segments[0].planes)
    if (mapping[p] >= 0) found.push_back(mapping[p]);
  EXPECT_GE(jaccard(segment_plane_sets({s.segments[0]}, mapping, sc.buildings[0].truth).at(0), door.planes), 0.5);
  for (int p : s.segments[0].planes) EXPECT_LT(regions[p].area, AggParams{}.A_epsilon);
}

TEST(GenerateSegments, RooftopIsSecondClosedSegment) {
  const auto regions = detected("rooftop-box");
  VisParams vp;
  vp.n_s = 80;
  const auto s = generate_segments(regions, AggParams{}, vp);
  EXPECT_EQ(s.alcove_count, 0);
  EXPECT_EQ(s.segments.size(), 2u);
}

TEST(GenerateSegments, NonPositiveThresholdThrows) {
  AggParams p;
  p.A_epsilon = 0;
  EXPECT_THROW(generate_segments(box_regions(Vec3(0, 0, 0), Vec3(1, 1, 1)), p, VisParams{}), Error);
}

TEST(GenerateSegments, PlanesAssignedToExactlyOneSegment) {
  for (const std::string name : {"alcove-box", "rooftop-box", "duplex"}) {
    const auto regions = detected(name);
    VisParams vp;
    vp.n_s = 60;
    const auto s = generate_segments(regions, AggParams{}, vp);
    std::map<int, int> count;
    for (const auto& seg : s.segments) {
      EXPECT_FALSE(seg.planes.empty());
      EXPECT_FALSE(seg.voxels.empty());
      for (int p : seg.planes) count[p]++;
    }
    for (const auto& [p, c] : count) EXPECT_EQ(c, 1) << name << " plane " << p;
  }
}

TEST(GenerateSegments, WithoutSmallPlanesEqualsClosedPass) {
  const auto regions = detected("rooftop-box");
  AggParams agg;
  agg.A_epsilon = 1e-6;
  VisParams vp;
  vp.n_s = 50;
  const auto s = generate_segments(regions, agg, vp);
  EXPECT_EQ(s.reversed_planes, 0);
  const VoxelField f = build_field(regions, s.grid, vp);
  const auto closed = assign_planes(aggregate(form_plane_groups(f, agg.min_group_hits(vp.n_r)), f,
                                              SegmentKind::Closed, agg.overlap_ratio, 0, agg.significance));
  ASSERT_EQ(s.segments.size(), closed.size());
  for (std::size_t i = 0; i < closed.size(); ++i) {
    EXPECT_EQ(s.segments[i].planes, closed[i].planes);
    EXPECT_EQ(s.segments[i].voxels, closed[i].voxels);
  }
}

TEST(Aggregate, OrderIndependentOverShuffles) {
  for (const std::string name : {"rooftop-box", "duplex", "alcove-box"}) {
    const auto regions = detected(name);
    VisParams vp;
    vp.n_s = 40;
    const AggParams agg;
    const VoxelField f = build_field(regions, make_grid(regions, vp.n_s), vp);
    const auto groups = form_plane_groups(f, agg.min_group_hits(vp.n_r));
    const auto reference =
        plane_partition(assign_planes(aggregate(groups, f, SegmentKind::Closed, 0.5, 0, agg.significance)));
    for (uint64_t seed = 1; seed <= 100; ++seed)
      EXPECT_EQ(plane_partition(assign_planes(aggregate(groups, f, SegmentKind::Closed, 0.5, seed, agg.significance))),
                reference)
          << name << " seed " << seed;
  }
}

TEST(GenerateSegments, PartyWallSplitsDuplex) {
  const auto s = generate_segments(detected("duplex"), AggParams{}, VisParams{});
  EXPECT_EQ(s.alcove_count, 0);
  EXPECT_EQ(s.segments.size(), 2u);
}

// The duplex is left out: its facade planes span both units, so exclusive
// plane assignment cannot reproduce both truth segments.
TEST(GenerateSegments, MatchesGroundTruthAtDefaults) {
  for (const std::string name : {"box", "rooftop-box", "alcove-box"}) {
    const Scene sc = generate(fixture(name));
    const auto& b = sc.buildings[0];
    const auto regions = detect_planes(b.cloud, DetectParams{});
    const auto s = generate_segments(regions, AggParams{}, VisParams{});
    const auto mapping = map_to_truth(regions, b.truth);
    EXPECT_DOUBLE_EQ(sdr(segment_plane_sets(s.segments, mapping, b.truth), truth_plane_sets(b.truth)), 100.0)
        << name;
    EXPECT_EQ(s.segments.size(), b.truth.segments.size()) << name;
  }
}
