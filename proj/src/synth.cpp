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

#include "archlod/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include "json.hpp"
#include <random>

#include "archlod/io.hpp"
#include "archlod/parallel.hpp"

namespace archlod {

namespace {

constexpr double kSurfaceEps = 1e-6;

struct FaceKey {
  int axis, sign;
  long long coord;
  auto operator<=>(const FaceKey&) const = default;
};

bool solid_inside(const BuildingSpec& b, const Vec3& p) {
  bool in = false;
  for (const auto& s : b.solids) in = in || s.contains(p);
  if (!in) return false;
  for (const auto& c : b.cavities)
    if (c.contains_open(p)) return false;
  return true;
}

void check_manifold(const BuildingSpec& b) {
  if (b.solids.empty()) throw Error("building " + b.name + " has no solids");
  for (const auto& s : b.solids)
    if (((s.max - s.min).array() <= 0).any()) throw Error("degenerate solid in " + b.name);
  for (std::size_t i = 0; i < b.solids.size(); ++i)
    for (std::size_t j = i + 1; j < b.solids.size(); ++j) {
      const Vec3 lo = b.solids[i].min.cwiseMax(b.solids[j].min);
      const Vec3 hi = b.solids[i].max.cwiseMin(b.solids[j].max);
      if ((hi.array() < lo.array()).any()) continue;
      const int flat = static_cast<int>(((hi - lo).array() == 0).count());
      if (flat >= 2) throw Error("solids in " + b.name + " touch along an edge or corner");
    }
}

Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

SynthBuilding generate_building(const SceneSpec& spec, std::size_t bi) {
  const BuildingSpec& b = spec.buildings[bi];
  check_manifold(b);
  if (spec.density <= 0) throw Error("density must be positive");
  std::mt19937_64 rng(spec.seed * 1000003ULL + bi * 7919ULL + 17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Matrix3d R = rot_z(b.rotation_z);
  const double cell = 1.0 / std::sqrt(spec.density);

  SynthBuilding out;
  out.name = b.name;

  struct PlaneAcc {
    Vec3 normal;
    double coord;
    int axis;
    AABB bounds;
    double area = 0;
    std::vector<int> parts;
  };
  std::map<FaceKey, PlaneAcc> acc;

  auto parts_of = [&](bool cavity, int box) {
    std::vector<int> ids;
    for (std::size_t p = 0; p < b.parts.size(); ++p) {
      const bool is_alcove = b.parts[p].kind == "alcove";
      if (cavity ? (is_alcove && b.parts[p].box == box) : (!is_alcove && b.parts[p].box == box))
        ids.push_back(static_cast<int>(p));
    }
    if (cavity && ids.empty())
      for (std::size_t p = 0; p < b.parts.size(); ++p)
        if (b.parts[p].kind == "main") ids.push_back(static_cast<int>(p));
    return ids;
  };

  auto sample_rect = [&](const Vec3& lo, const Vec3& hi, int axis, const Vec3& n, bool always,
                         const std::vector<int>& parts) {
    const int ua = (axis + 1) % 3, va = (axis + 2) % 3;
    const double lu = hi[ua] - lo[ua], lv = hi[va] - lo[va];
    const int nu = std::max(1, static_cast<int>(std::ceil(lu / cell)));
    const int nv = std::max(1, static_cast<int>(std::ceil(lv / cell)));
    const double cu = lu / nu, cv = lv / nv;
    std::size_t kept = 0;
    PlaneAcc* pa = nullptr;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        Vec3 p = lo;
        p[ua] = lo[ua] + (i + unif(rng)) * cu;
        p[va] = lo[va] + (j + unif(rng)) * cv;
        const Vec3 noise(gauss(rng), gauss(rng), gauss(rng));
        if (!always && !(solid_inside(b, p - kSurfaceEps * n) && !solid_inside(b, p + kSurfaceEps * n)))
          continue;
        const Vec3 w = R * p + b.translation;
        out.cloud.points.push_back(w + spec.noise_sigma * noise);
        out.cloud.normals.push_back(R * n);
        if (!pa) {
          const FaceKey key{axis, n[axis] > 0 ? 1 : -1, std::llround(lo[axis] * 1e6)};
          auto [it, fresh] = acc.try_emplace(key);
          pa = &it->second;
          if (fresh) {
            pa->normal = n;
            pa->coord = lo[axis];
            pa->axis = axis;
          }
          for (int q : parts)
            if (std::find(pa->parts.begin(), pa->parts.end(), q) == pa->parts.end()) pa->parts.push_back(q);
        }
        pa->bounds.extend(w);
        ++kept;
      }
    if (pa) pa->area += static_cast<double>(kept) * cu * cv;
  };

  auto sample_box = [&](const Box3& box, bool cavity, int index) {
    const auto parts = parts_of(cavity, index);
    for (int axis = 0; axis < 3; ++axis)
      for (int side = 0; side < 2; ++side) {
        Vec3 lo = box.min, hi = box.max;
        Vec3 n = Vec3::Zero();
        n[axis] = (side == 1 ? 1.0 : -1.0) * (cavity ? -1.0 : 1.0);
        if (side == 1) lo[axis] = box.max[axis];
        else hi[axis] = box.min[axis];
        sample_rect(lo, hi, axis, n, false, parts);
      }
  };

  for (std::size_t s = 0; s < b.solids.size(); ++s) sample_box(b.solids[s], false, static_cast<int>(s));
  for (std::size_t c = 0; c < b.cavities.size(); ++c) sample_box(b.cavities[c], true, static_cast<int>(c));
  for (const auto& pw : b.party_walls) {
    int axis = 0;
    for (int a = 0; a < 3; ++a)
      if (pw.max[a] == pw.min[a]) axis = a;
    sample_rect(pw.min, pw.max, axis, pw.normal.normalized(), true, parts_of(false, 0));
  }
  if (out.cloud.points.empty()) throw Error("building " + b.name + " produced no samples");

  for (auto& [key, pa] : acc) {
    GtPlane gp;
    gp.normal = R * pa.normal;
    Vec3 on = Vec3::Zero();
    on[pa.axis] = pa.coord;
    gp.offset = dot3(gp.normal, R * on + b.translation);
    gp.bounds = pa.bounds;
    gp.area = pa.area;
    gp.parts = pa.parts;
    out.truth.planes.push_back(gp);
  }
  for (std::size_t p = 0; p < b.parts.size(); ++p) {
    if (b.parts[p].expected_layer < 0) continue;
    GtSegment seg;
    seg.name = b.parts[p].name;
    seg.kind = b.parts[p].kind;
    seg.expected_layer = b.parts[p].expected_layer;
    for (std::size_t g = 0; g < out.truth.planes.size(); ++g) {
      const auto& gp = out.truth.planes[g];
      if (std::abs(gp.normal.z()) > 0.5) continue;
      if (std::find(gp.parts.begin(), gp.parts.end(), static_cast<int>(p)) != gp.parts.end())
        seg.planes.push_back(static_cast<int>(g));
    }
    out.truth.segments.push_back(seg);
  }
  return out;
}

}  // namespace

Scene generate(const SceneSpec& spec, int threads) {
  Scene scene;
  scene.name = spec.name;
  scene.l_n = spec.l_n;
  scene.buildings.resize(spec.buildings.size());
  parallel_for(spec.buildings.size(), threads,
               [&](std::size_t i) { scene.buildings[i] = generate_building(spec, i); });
  std::map<std::string, int> keys;
  for (const auto& b : spec.buildings)
    for (const auto& p : b.parts)
      if (!p.repeat_key.empty()) keys[p.repeat_key]++;
  for (std::size_t i = 0; i < spec.buildings.size(); ++i) {
    std::size_t s = 0;
    for (const auto& p : spec.buildings[i].parts) {
      if (p.expected_layer < 0) continue;
      scene.buildings[i].truth.segments[s++].repetitive = !p.repeat_key.empty() && keys[p.repeat_key] >= 2;
    }
  }
  return scene;
}

namespace {

Box3 box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return Box3{Vec3(x0, y0, z0), Vec3(x1, y1, z1)};
}

BuildingSpec tower(const std::string& name, double x) {
  BuildingSpec b;
  b.name = name;
  b.solids = {box(0, 0, 0, 20, 16, 12), box(8, 6, 12, 12, 10, 14.5)};
  b.parts = {{"main", "main", "", 0, 0}, {"rooftop", "rooftop", "rooftop", 1, 1}};
  b.translation = Vec3(x, 0, 0);
  return b;
}

BuildingSpec u_building(const std::string& name, double x) {
  BuildingSpec b;
  b.name = name;
  b.solids = {box(0, 0, 0, 34, 24, 12)};
  b.cavities = {box(10, -1, -1, 24, 8, 13), box(11.5, 7, -1, 15.5, 12, 3), box(18.5, 7, -1, 22.5, 12, 3)};
  b.parts = {{"main", "main", "", 0, 0},
             {"door-a", "alcove", "door", 1, 1},
             {"door-b", "alcove", "door", 2, 1}};
  b.translation = Vec3(x, 0, 0);
  return b;
}

BuildingSpec campus_building(int i) {
  BuildingSpec b;
  b.name = "campus_" + std::to_string(i);
  const bool large = i % 2 == 0;
  const double L = large ? 24 : 20, W = large ? 18 : 20, H = large ? 10 : 12;
  b.solids.push_back(box(0, 0, 0, L, W, H));
  b.parts.push_back({"main", "main", "", 0, 0});
  // Penthouse, shifted per building so footprints vary.
  const double px = 3 + (i % 3), py = 3 + (i % 2);
  b.solids.push_back(box(px, py, H, px + 6, py + 6, H + 3));
  b.parts.push_back({"penthouse", "penthouse", "penthouse", 1, 1});
  b.solids.push_back(box(L - 5, W - 5, H, L - 3, W - 3, H + 1.5));
  b.parts.push_back({"unit-a", "unit", "unit", 2, 2});
  if (i % 4 == 1 || i % 4 == 2) {
    b.solids.push_back(box(L - 5, 3, H, L - 3, 5, H + 1.5));
    b.parts.push_back({"unit-b", "unit", "unit", 3, 2});
  }
  b.translation = Vec3((i % 4) * 30.0, (i / 4) * 28.0, 0);
  return b;
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"cube", "box", "rooftop-box", "alcove-box", "duplex", "twin-towers", "alcove-row", "mixed-campus"};
}

SceneSpec fixture(const std::string& name) {
  SceneSpec s;
  s.name = name;
  s.seed = 7;
  if (name == "cube") {
    BuildingSpec b;
    b.name = "cube";
    b.solids = {box(0, 0, 0, 1, 1, 1)};
    b.parts = {{"main", "main", "", 0, 0}};
    s.buildings = {b};
    s.density = 10000;
  } else if (name == "box") {
    BuildingSpec b;
    b.name = "box";
    b.solids = {box(0, 0, 0, 10, 10, 10)};
    b.parts = {{"main", "main", "", 0, 0}};
    s.buildings = {b};
    s.noise_sigma = 0.02;
    s.density = 30;
  } else if (name == "rooftop-box") {
    BuildingSpec b;
    b.name = "rooftop_box";
    b.solids = {box(0, 0, 0, 12, 10, 8), box(4, 3, 8, 8, 7, 10.5)};
    b.parts = {{"main", "main", "", 0, 0}, {"rooftop", "rooftop", "", 1, 1}};
    s.buildings = {b};
    s.noise_sigma = 0.01;
    s.density = 40;
  } else if (name == "alcove-box") {
    BuildingSpec b;
    b.name = "alcove_box";
    b.solids = {box(0, 0, 0, 16, 12, 8)};
    b.cavities = {box(6, -1, -1, 10, 3, 3)};
    b.parts = {{"main", "main", "", 0, 0}, {"door", "alcove", "", 0, 1}};
    s.buildings = {b};
    s.noise_sigma = 0.01;
    s.density = 40;
  } else if (name == "duplex") {
    BuildingSpec b;
    b.name = "duplex";
    b.solids = {box(0, 0, 0, 10, 20, 8), box(10, 0, 0, 20, 20, 8)};
    b.party_walls = {{Vec3(10, 0, 0), Vec3(10, 20, 8), Vec3(1, 0, 0)}};
    b.parts = {{"unit-a", "main", "", 0, 0}, {"unit-b", "wing", "", 1, 0}};
    s.buildings = {b};
    s.noise_sigma = 0.01;
    s.density = 30;
  } else if (name == "twin-towers") {
    for (int i = 0; i < 4; ++i) s.buildings.push_back(tower("tower_" + std::to_string(i), i * 40.0));
    s.noise_sigma = 0.02;
    s.density = 30;
  } else if (name == "alcove-row") {
    for (int i = 0; i < 3; ++i) s.buildings.push_back(u_building("row_" + std::to_string(i), i * 50.0));
    s.noise_sigma = 0.02;
    s.density = 20;
  } else if (name == "mixed-campus") {
    for (int i = 0; i < 8; ++i) s.buildings.push_back(campus_building(i));
    s.noise_sigma = 0.02;
    s.density = 28;
    s.l_n = 3;
  } else {
    throw Error("unknown fixture: " + name);
  }
  return s;
}

std::string ground_truth_json(const Scene& scene) {
  nlohmann::ordered_json j;
  j["scene"] = scene.name;
  j["l_n"] = scene.l_n;
  j["buildings"] = nlohmann::ordered_json::array();
  for (const auto& b : scene.buildings) {
    nlohmann::ordered_json jb;
    jb["name"] = b.name;
    jb["points"] = b.cloud.size();
    jb["planes"] = nlohmann::ordered_json::array();
    for (const auto& p : b.truth.planes)
      jb["planes"].push_back({{"normal", {p.normal.x(), p.normal.y(), p.normal.z()}},
                              {"offset", p.offset},
                              {"area", p.area},
                              {"min", {p.bounds.min.x(), p.bounds.min.y(), p.bounds.min.z()}},
                              {"max", {p.bounds.max.x(), p.bounds.max.y(), p.bounds.max.z()}},
                              {"parts", p.parts}});
    jb["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : b.truth.segments)
      jb["segments"].push_back({{"name", s.name},
                                {"kind", s.kind},
                                {"planes", s.planes},
                                {"repetitive", s.repetitive},
                                {"expected_layer", s.expected_layer}});
    j["buildings"].push_back(jb);
  }
  return j.dump(2);
}

const GroundTruth* TruthFile::find(const std::string& name) const {
  for (const auto& [n, t] : buildings)
    if (n == name) return &t;
  return nullptr;
}

TruthFile parse_ground_truth(const std::string& json_text) {
  TruthFile out;
  try {
    const auto j = nlohmann::json::parse(json_text);
    out.scene = j.value("scene", "");
    out.l_n = j.value("l_n", 2);
    auto vec = [](const nlohmann::json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
    for (const auto& jb : j.at("buildings")) {
      GroundTruth t;
      for (const auto& jp : jb.at("planes")) {
        GtPlane p;
        p.normal = vec(jp.at("normal"));
        p.offset = jp.at("offset").get<double>();
        p.area = jp.value("area", 0.0);
        p.bounds.min = vec(jp.at("min"));
        p.bounds.max = vec(jp.at("max"));
        p.parts = jp.value("parts", std::vector<int>{});
        t.planes.push_back(p);
      }
      for (const auto& js : jb.at("segments")) {
        GtSegment s;
        s.name = js.value("name", "");
        s.kind = js.value("kind", "");
        s.planes = js.at("planes").get<std::vector<int>>();
        s.repetitive = js.value("repetitive", false);
        s.expected_layer = js.value("expected_layer", 0);
        t.segments.push_back(s);
      }
      out.buildings.emplace_back(jb.at("name").get<std::string>(), std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ground truth: ") + e.what());
  }
  return out;
}

void write_scene(const Scene& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& b : scene.buildings) write_ply(dir + "/" + b.name + ".ply", b.cloud);
  std::ofstream(dir + "/ground_truth.json") << ground_truth_json(scene) << "\n";
}

}  // namespace archlod
