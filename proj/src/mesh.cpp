#include "ehap/mesh.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <utility>

#include "ehap/error.hpp"

namespace ehap {

static_assert(std::endian::native == std::endian::little, "STL I/O assumes a little-endian host");

namespace {

Vec3 corner(const TriMesh& m, const std::array<std::uint32_t, 3>& t, int k) {
  return m.vertices[t[k]];
}

std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed_edges(const TriMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> e;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) ++e[{t[k], t[(k + 1) % 3]}];
  }
  return e;
}

std::map<std::pair<std::uint32_t, std::uint32_t>, int> undirected_edges(const TriMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> e;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k], b = t[(k + 1) % 3];
      ++e[{std::min(a, b), std::max(a, b)}];
    }
  }
  return e;
}

}  // namespace

double TriMesh::surface_area() const {
  double area = 0.0;
  for (const auto& t : triangles) {
    area += 0.5 * (corner(*this, t, 1) - corner(*this, t, 0))
                      .cross(corner(*this, t, 2) - corner(*this, t, 0))
                      .norm();
  }
  return area;
}

double TriMesh::enclosed_volume() const {
  double vol = 0.0;
  for (const auto& t : triangles) {
    vol += corner(*this, t, 0).dot(corner(*this, t, 1).cross(corner(*this, t, 2)));
  }
  return vol / 6.0;
}

bool TriMesh::is_watertight() const {
  if (triangles.empty()) return false;
  const auto e = undirected_edges(*this);
  return std::all_of(e.begin(), e.end(), [](const auto& kv) { return kv.second == 2; });
}

bool TriMesh::is_consistently_oriented() const {
  if (!is_watertight()) return false;
  const auto e = directed_edges(*this);
  for (const auto& [edge, count] : e) {
    if (count != 1) return false;
    if (!e.count({edge.second, edge.first})) return false;
  }
  return true;
}

std::size_t TriMesh::boundary_edge_count() const {
  const auto e = undirected_edges(*this);
  return static_cast<std::size_t>(
      std::count_if(e.begin(), e.end(), [](const auto& kv) { return kv.second == 1; }));
}

std::size_t TriMesh::degenerate_triangle_count(double min_area) const {
  std::size_t n = 0;
  for (const auto& t : triangles) {
    const double a = 0.5 * (corner(*this, t, 1) - corner(*this, t, 0))
                               .cross(corner(*this, t, 2) - corner(*this, t, 0))
                               .norm();
    if (a <= min_area) ++n;
  }
  return n;
}

void TriMesh::validate() const {
  for (const auto& t : triangles) {
    for (auto i : t) {
      if (i >= vertices.size()) throw ValidationError("mesh: triangle index out of range");
    }
  }
}

void write_stl(const std::filesystem::path& path, const TriMesh& mesh, std::string_view header) {
  mesh.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write STL '" + path.string() + "'");
  char head[80];
  std::memset(head, ' ', sizeof(head));
  std::memcpy(head, header.data(), std::min<std::size_t>(header.size(), sizeof(head)));
  out.write(head, sizeof(head));
  const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const auto& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    float buf[12];
    for (int k = 0; k < 3; ++k) {
      buf[k] = static_cast<float>(n[k]);
      buf[3 + k] = static_cast<float>(a[k]);
      buf[6 + k] = static_cast<float>(b[k]);
      buf[9 + k] = static_cast<float>(c[k]);
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
  if (!out) throw NumericError("write failed for '" + path.string() + "'");
}

TriMesh read_stl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open STL '" + path.string() + "'");
  char head[80];
  std::uint32_t count = 0;
  in.read(head, sizeof(head));
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw ValidationError("STL '" + path.string() + "' is truncated");
  TriMesh mesh;
  mesh.vertices.reserve(3 * static_cast<std::size_t>(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    float buf[12];
    std::uint16_t attr;
    in.read(reinterpret_cast<char*>(buf), sizeof(buf));
    in.read(reinterpret_cast<char*>(&attr), 2);
    if (!in) throw ValidationError("STL '" + path.string() + "' is truncated");
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int k = 0; k < 3; ++k) mesh.vertices.emplace_back(buf[3 + 3 * k], buf[4 + 3 * k], buf[5 + 3 * k]);
    mesh.triangles.push_back({base, base + 1, base + 2});
  }
  return mesh;
}

}  // namespace ehap
