#pragma once

#include "fsi/common.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace fsi {

enum class Region : std::uint8_t { Fluid, Solid };
enum class EdgeTag : std::uint8_t { Interior, GammaF, GammaS };

struct Triangle {
  std::array<Index, 3> v;
  Region region;

  friend bool operator==(const Triangle&, const Triangle&) = default;
};

struct Edge {
  std::array<Index, 2> v; // v[0] < v[1]
  EdgeTag tag;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Structured triangulation of the unit square with the solid block
/// [1/3,2/3]^2 embedded. The grid has 6*2^level cells per side, so the
/// interface lines are mesh lines at every level. Vertex (i,j) of the grid
/// has id j*(n+1)+i.
///
/// Cells are split along the (i,j)-(i+1,j+1) diagonal, except cells inside
/// the lower-right and upper-left corner blocks of side 1/6, which use the
/// other diagonal. Otherwise the two corner triangles would have all three
/// vertices on the outer boundary.
struct TriMesh {
  int level = 0;
  Index cells_per_side = 0;
  double hypotenuse = 0.0;
  std::vector<Vector2> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles.size()); }

  /// Grid coordinates (i,j) of a vertex id.
  std::array<Index, 2> grid_index(Index vertex) const {
    return {vertex % (cells_per_side + 1), vertex / (cells_per_side + 1)};
  }

  bool on_outer_boundary(Index vertex) const;
  bool on_interface(Index vertex) const;

  double triangle_area(Index t) const;
  Vector2 centroid(Index t) const;
};

bool operator==(const TriMesh& a, const TriMesh& b);

/// Mesh at the given refinement level: 72 * 4^level triangles.
TriMesh generate_mesh(int level);

/// Red refinement (each triangle split into four by its edge midpoints).
/// The result is identical, including numbering, to generate_mesh(level+1).
TriMesh refine(const TriMesh& mesh);

/// Plain-text mesh file:
///   ntri nvert level
///   index x y              (nvert lines)
///   index v0 v1 v2 region  (ntri lines, region = fluid|solid)
///   v0 v1 tag              (remaining lines, tag = interior|gamma_f|gamma_s)
void export_mesh(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh import_mesh(const std::filesystem::path& path);

/// Largest level whose P2 vector DOF count still fits the index type with
/// margin for sparse nonzeros.
int max_supported_level();

} // namespace fsi
