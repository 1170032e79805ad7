#pragma once

// Indexed triangle meshes and binary STL I/O.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace ehap {

using Vec3 = Eigen::Vector3d;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  double surface_area() const;
  // Divergence theorem; positive for outward-oriented closed meshes.
  double enclosed_volume() const;
  // Every undirected edge used by exactly two triangles.
  bool is_watertight() const;
  // Watertight and every directed edge used once (consistent orientation).
  bool is_consistently_oriented() const;
  std::size_t boundary_edge_count() const;
  std::size_t degenerate_triangle_count(double min_area = 1e-18) const;
  void validate() const;  // throws ValidationError on out-of-range indices
};

// Binary STL, little-endian, float32 coordinates. The 80-byte header is
// `header` padded with spaces so files are reproducible.
void write_stl(const std::filesystem::path& path, const TriMesh& mesh,
               std::string_view header = "ehap");

// Reads a binary STL; vertices are not welded (three per triangle).
TriMesh read_stl(const std::filesystem::path& path);

}  // namespace ehap
