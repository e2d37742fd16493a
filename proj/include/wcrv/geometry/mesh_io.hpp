#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcrv/common/errors.hpp"
#include "wcrv/geometry/surface.hpp"

namespace wcrv {

struct MeshData {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// OFF reader, triangles only.
inline MeshData read_off(std::istream& in) {
  std::string tok;
  if (!(in >> tok) || tok != "OFF") throw ValidationError("not an OFF file");
  long nv = 0, nf = 0, ne = 0;
  if (!(in >> nv >> nf >> ne)) throw ValidationError("bad OFF header");
  MeshData m;
  m.vertices.resize(nv);
  for (long i = 0; i < nv; ++i)
    if (!(in >> m.vertices[i][0] >> m.vertices[i][1] >> m.vertices[i][2]))
      throw ValidationError("bad OFF vertex " + std::to_string(i));
  m.triangles.resize(nf);
  for (long i = 0; i < nf; ++i) {
    int k = 0;
    if (!(in >> k)) throw ValidationError("bad OFF face " + std::to_string(i));
    if (k != 3) throw ValidationError("OFF face " + std::to_string(i) + " is not a triangle");
    in >> m.triangles[i][0] >> m.triangles[i][1] >> m.triangles[i][2];
  }
  return m;
}

/// OBJ reader honoring v/f records, triangles only. 1-based face indices,
/// "f a/b/c" attribute syntax stripped.
inline MeshData read_obj(std::istream& in) {
  MeshData m;
  std::string line;
  auto strip_index = [](const std::string& s) {
    return std::stol(s.substr(0, s.find('/')));
  };
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d p;
      if (!(ls >> p[0] >> p[1] >> p[2])) throw ValidationError("bad OBJ vertex line: " + line);
      m.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<long> ids;
      std::string s;
      while (ls >> s) ids.push_back(strip_index(s));
      if (ids.size() != 3) throw ValidationError("OBJ face is not a triangle: " + line);
      std::array<int, 3> tri;
      for (int k = 0; k < 3; ++k) {
        long id = ids[k];
        if (id < 0) id = static_cast<long>(m.vertices.size()) + 1 + id;
        tri[k] = static_cast<int>(id - 1);
      }
      m.triangles.push_back(tri);
    }
  }
  if (m.vertices.empty() || m.triangles.empty()) throw ValidationError("empty OBJ mesh");
  return m;
}

inline Surface load_mesh_surface(const std::string& path, double khat) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh file " + path);
  MeshData m;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".obj")
    m = read_obj(in);
  else
    m = read_off(in);
  return Surface::triangle_mesh(std::move(m.vertices), std::move(m.triangles), khat);
}

/// Icosphere: subdivided icosahedron projected to the sphere of radius
/// 1/sqrt(khat). Handy as a procedurally generated mesh backend.
inline Surface icosphere(double khat, int subdivisions) {
  if (khat <= 0.0) throw ValidationError("icosphere requires khat > 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d p = (v[a] + v[b]).normalized();
      v.push_back(p);
      int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& t : f) {
      int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      nf.push_back({t[0], a, c});
      nf.push_back({t[1], b, a});
      nf.push_back({t[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  const double radius = 1.0 / std::sqrt(khat);
  for (auto& p : v) p *= radius;
  return Surface::triangle_mesh(std::move(v), std::move(f), khat);
}

} // namespace wcrv
