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

#include "archlod/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace archlod {

Vec3 face_normal(const PolyMesh& m, std::size_t f) {
  Vec3 n = Vec3::Zero();
  const auto& loop = m.faces[f];
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = m.vertices[loop[i]];
    const Vec3& b = m.vertices[loop[(i + 1) % loop.size()]];
    n += Vec3((a.y() - b.y()) * (a.z() + b.z()), (a.z() - b.z()) * (a.x() + b.x()),
              (a.x() - b.x()) * (a.y() + b.y()));
  }
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double face_area(const PolyMesh& m, std::size_t f) {
  Vec3 n = Vec3::Zero();
  const auto& loop = m.faces[f];
  const Vec3& o = m.vertices[loop[0]];
  for (std::size_t i = 1; i + 1 < loop.size(); ++i)
    n += (m.vertices[loop[i]] - o).cross(m.vertices[loop[i + 1]] - o);
  return 0.5 * n.norm();
}

double mesh_area(const PolyMesh& m) {
  double a = 0;
  for (std::size_t f = 0; f < m.faces.size(); ++f) a += face_area(m, f);
  return a;
}

double mesh_volume(const PolyMesh& m) {
  double v = 0;
  for (const auto& loop : m.faces) {
    const Vec3& o = m.vertices[loop[0]];
    for (std::size_t i = 1; i + 1 < loop.size(); ++i)
      v += o.dot(m.vertices[loop[i]].cross(m.vertices[loop[i + 1]]));
  }
  return v / 6.0;
}

namespace {

enum class PlyFormat { Ascii, BinaryLE, BinaryBE };

int type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw Error("unsupported PLY property type: " + t);
}

template <class T>
T load(const char* p, bool swap) {
  T v;
  char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if (swap) std::reverse(buf, buf + sizeof(T));
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

double decode(const std::string& t, const char* p, bool swap) {
  if (t == "char" || t == "int8") return load<int8_t>(p, swap);
  if (t == "uchar" || t == "uint8") return load<uint8_t>(p, swap);
  if (t == "short" || t == "int16") return load<int16_t>(p, swap);
  if (t == "ushort" || t == "uint16") return load<uint16_t>(p, swap);
  if (t == "int" || t == "int32") return load<int32_t>(p, swap);
  if (t == "uint" || t == "uint32") return load<uint32_t>(p, swap);
  if (t == "float" || t == "float32") return load<float>(p, swap);
  return load<double>(p, swap);
}

struct PlyProp {
  std::string name, type, list_count_type;
  bool is_list = false;
};
struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProp> props;
};

}  // namespace

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(path + ": not a PLY file");
  PlyFormat fmt = PlyFormat::Ascii;
  std::vector<PlyElement> elems;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") fmt = PlyFormat::Ascii;
      else if (f == "binary_little_endian") fmt = PlyFormat::BinaryLE;
      else if (f == "binary_big_endian") fmt = PlyFormat::BinaryBE;
      else throw Error(path + ": unknown PLY format " + f);
    } else if (kw == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elems.push_back(e);
    } else if (kw == "property") {
      if (elems.empty()) throw Error(path + ": property before element");
      PlyProp p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.list_count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elems.back().props.push_back(p);
    } else if (kw == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw Error(path + ": truncated PLY header");
  const auto vit = std::find_if(elems.begin(), elems.end(), [](const auto& e) { return e.name == "vertex"; });
  if (vit == elems.end()) throw Error(path + ": PLY has no vertex element");
  auto find_prop = [&](const std::string& n) {
    for (std::size_t i = 0; i < vit->props.size(); ++i)
      if (vit->props[i].name == n) return static_cast<int>(i);
    return -1;
  };
  const int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  const int inx = find_prop("nx"), iny = find_prop("ny"), inz = find_prop("nz");
  if (ix < 0 || iy < 0 || iz < 0) throw Error(path + ": PLY vertex lacks x, y, z");
  if (inx < 0 || iny < 0 || inz < 0)
    throw Error(path + ": PLY has no normals (nx, ny, nz); normal estimation is not supported, "
                       "provide oriented normals with the input");

  PointCloud cloud;
  cloud.points.reserve(vit->count);
  cloud.normals.reserve(vit->count);
  const bool swap = (fmt == PlyFormat::BinaryBE) == (std::endian::native == std::endian::little);
  std::vector<double> vals;
  for (const auto& e : elems) {
    const bool is_vertex = &e == &*vit;
    for (std::size_t r = 0; r < e.count; ++r) {
      vals.assign(e.props.size(), 0.0);
      if (fmt == PlyFormat::Ascii) {
        if (!std::getline(in, line)) throw Error(path + ": truncated PLY body");
        std::istringstream ls(line);
        for (std::size_t p = 0; p < e.props.size(); ++p) {
          if (e.props[p].is_list) {
            double n;
            ls >> n;
            for (int k = 0; k < static_cast<int>(n); ++k) {
              double dummy;
              ls >> dummy;
            }
          } else if (!(ls >> vals[p])) {
            throw Error(path + ": malformed PLY row");
          }
        }
      } else {
        for (std::size_t p = 0; p < e.props.size(); ++p) {
          const auto& pr = e.props[p];
          if (pr.is_list) {
            char buf[8];
            const int cs = type_size(pr.list_count_type);
            if (!in.read(buf, cs)) throw Error(path + ": truncated PLY body");
            const auto n = static_cast<std::size_t>(decode(pr.list_count_type, buf, swap));
            in.ignore(static_cast<std::streamsize>(n * type_size(pr.type)));
          } else {
            char buf[8];
            const int sz = type_size(pr.type);
            if (!in.read(buf, sz)) throw Error(path + ": truncated PLY body");
            vals[p] = decode(pr.type, buf, swap);
          }
        }
      }
      if (!is_vertex) continue;
      const Vec3 p(vals[ix], vals[iy], vals[iz]);
      Vec3 n(vals[inx], vals[iny], vals[inz]);
      const double len = n.norm();
      if (!(len > 0) || !p.allFinite()) throw Error(path + ": invalid vertex " + std::to_string(r));
      cloud.points.push_back(p);
      cloud.normals.push_back(n / len);
    }
  }
  cloud.validate();
  return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
         "property double nx\nproperty double ny\nproperty double nz\nend_header\n";
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double v[6] = {cloud.points[i].x(),  cloud.points[i].y(),  cloud.points[i].z(),
                         cloud.normals[i].x(), cloud.normals[i].y(), cloud.normals[i].z()};
    out.write(reinterpret_cast<const char*>(v), sizeof(v));
  }
  if (!out) throw Error("write failed: " + path);
}

PolyMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  PolyMesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw Error(path + ": malformed vertex");
      m.vertices.emplace_back(x, y, z);
    } else if (kw == "f") {
      std::vector<int> loop;
      std::string tok;
      while (ls >> tok) {
        const int idx = std::stoi(tok.substr(0, tok.find('/')));
        const int v = idx < 0 ? static_cast<int>(m.vertices.size()) + idx : idx - 1;
        if (v < 0 || v >= static_cast<int>(m.vertices.size())) throw Error(path + ": face index out of range");
        loop.push_back(v);
      }
      if (loop.size() >= 3) {
        m.faces.push_back(loop);
        m.face_plane.push_back(-1);
      }
    }
  }
  return m;
}

void write_obj(const std::string& path, const PolyMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(10);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) {
    out << 'f';
    for (int i : f) out << ' ' << i + 1;
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

PointCloud sample_mesh(const PolyMesh& mesh, double density, uint64_t seed) {
  if (density <= 0) throw Error("sampling density must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PointCloud cloud;
  double carry = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 n = face_normal(mesh, f);
    if (n.squaredNorm() == 0) continue;
    const auto& loop = mesh.faces[f];
    const Vec3& a = mesh.vertices[loop[0]];
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
      const Vec3& b = mesh.vertices[loop[i]];
      const Vec3& c = mesh.vertices[loop[i + 1]];
      const double area = 0.5 * (b - a).cross(c - a).norm();
      const double want = area * density + carry;
      const auto k = static_cast<long>(std::floor(want));
      carry = want - static_cast<double>(k);
      for (long s = 0; s < k; ++s) {
        double r1 = unif(rng), r2 = unif(rng);
        if (r1 + r2 > 1) {
          r1 = 1 - r1;
          r2 = 1 - r2;
        }
        cloud.points.push_back(a + r1 * (b - a) + r2 * (c - a));
        cloud.normals.push_back(n);
      }
    }
  }
  return cloud;
}

PointCloud ingest(const std::string& path, double unit_scale, double obj_density) {
  if (!(unit_scale > 0)) throw Error("unit_scale must be positive");
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  PointCloud cloud;
  if (ext == ".ply") {
    cloud = read_ply(path);
    for (auto& p : cloud.points) p *= unit_scale;
  } else if (ext == ".obj") {
    PolyMesh m = read_obj(path);
    for (auto& v : m.vertices) v *= unit_scale;
    cloud = sample_mesh(m, obj_density);
  } else {
    throw Error(path + ": unsupported input format (expected .ply or .obj)");
  }
  cloud.validate();
  return cloud;
}

}  // namespace archlod
