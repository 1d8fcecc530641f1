#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

namespace occlusym {

using Vec3 = Eigen::Vector3d;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  // Throws ParameterError unless there is at least one triangle and every
  // index is in range.
  void validate() const;

  double triangle_area(std::size_t t) const;
  double total_area() const;
};

// ASCII OBJ: only `v` and `f` records are read; polygons are fan-triangulated
// and `v/vt/vn` index forms and negative indices are accepted.
TriMesh parse_obj(std::string_view text);
TriMesh load_obj(const std::filesystem::path& path);
std::string encode_obj(const TriMesh& mesh);

// Centers the bounding box at the origin and scales the longest axis to 1.
TriMesh normalize_to_unit_cube(const TriMesh& mesh);

TriMesh make_tetrahedron();
// Axis-aligned cube of the given edge length centered at the origin (12 triangles).
TriMesh make_cube(double edge = 1.0);
// Icosahedron refined `subdivisions` times and projected to radius 1
// (20 * 4^subdivisions faces).
TriMesh make_icosphere(int subdivisions);

using Adjacency = std::vector<std::vector<int>>;

// Triangles are neighbours iff they share an unordered vertex-pair edge.
// Neighbour lists are sorted ascending.
Adjacency build_adjacency(const TriMesh& mesh);

}  // namespace occlusym
