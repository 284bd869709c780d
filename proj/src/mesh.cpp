#include "fsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace fsi {
namespace {

struct Grid {
  Index n;

  Index id(Index i, Index j) const { return j * (n + 1) + i; }
  Index third() const { return n / 3; }

  bool solid_cell(Index i, Index j) const {
    return i >= third() && i < 2 * third() && j >= third() && j < 2 * third();
  }

  // Cells inside the lower-right and upper-left 1/6 corner blocks.
  bool anti_diagonal_cell(Index i, Index j) const {
    const Index sixth = n / 6;
    return (i >= n - sixth && j < sixth) || (i < sixth && j >= n - sixth);
  }

  std::array<std::array<Index, 3>, 2> cell_triangles(Index i, Index j) const {
    if (anti_diagonal_cell(i, j)) {
      return {{{id(i, j), id(i + 1, j), id(i, j + 1)},
               {id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}}};
    }
    return {{{id(i, j), id(i + 1, j), id(i + 1, j + 1)},
             {id(i, j), id(i + 1, j + 1), id(i, j + 1)}}};
  }

  EdgeTag horizontal_tag(Index i, Index j) const {
    if (j == 0 || j == n) return EdgeTag::GammaF;
    if ((j == third() || j == 2 * third()) && i >= third() && i < 2 * third())
      return EdgeTag::GammaS;
    return EdgeTag::Interior;
  }

  EdgeTag vertical_tag(Index i, Index j) const {
    if (i == 0 || i == n) return EdgeTag::GammaF;
    if ((i == third() || i == 2 * third()) && j >= third() && j < 2 * third())
      return EdgeTag::GammaS;
    return EdgeTag::Interior;
  }
};

Edge make_edge(Index a, Index b, EdgeTag tag) {
  return Edge{{std::min(a, b), std::max(a, b)}, tag};
}

const char* region_name(Region r) { return r == Region::Fluid ? "fluid" : "solid"; }

const char* tag_name(EdgeTag t) {
  switch (t) {
  case EdgeTag::GammaF: return "gamma_f";
  case EdgeTag::GammaS: return "gamma_s";
  default: return "interior";
  }
}

} // namespace

bool TriMesh::on_outer_boundary(Index vertex) const {
  const auto [i, j] = grid_index(vertex);
  return i == 0 || j == 0 || i == cells_per_side || j == cells_per_side;
}

bool TriMesh::on_interface(Index vertex) const {
  const auto [i, j] = grid_index(vertex);
  const Index lo = cells_per_side / 3, hi = 2 * lo;
  const bool in_box = i >= lo && i <= hi && j >= lo && j <= hi;
  return in_box && (i == lo || i == hi || j == lo || j == hi);
}

double TriMesh::triangle_area(Index t) const {
  const auto& v = triangles[t].v;
  const Vector2 e1 = vertices[v[1]] - vertices[v[0]];
  const Vector2 e2 = vertices[v[2]] - vertices[v[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Vector2 TriMesh::centroid(Index t) const {
  const auto& v = triangles[t].v;
  return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) / 3.0;
}

bool operator==(const TriMesh& a, const TriMesh& b) {
  return a.level == b.level && a.cells_per_side == b.cells_per_side &&
         a.hypotenuse == b.hypotenuse && a.vertices == b.vertices &&
         a.triangles == b.triangles && a.edges == b.edges;
}

int max_supported_level() {
  // P2 nodes (2n+1)^2, two components, ~30 nonzeros per row in the
  // assembled operators.
  for (int level = 0;; ++level) {
    const long double n = 6.0L * std::ldexp(1.0L, level);
    const long double nnz = 2.0L * (2.0L * n + 1.0L) * (2.0L * n + 1.0L) * 30.0L;
    if (nnz > static_cast<long double>(std::numeric_limits<int>::max())) return level - 1;
  }
}

TriMesh generate_mesh(int level) {
  require(level >= 0, "generate_mesh: level must be nonnegative");
  require(level <= max_supported_level(),
          "generate_mesh: level " + std::to_string(level) + " overflows the DOF index type");

  const Grid g{6 * (Index{1} << level)};
  const Index n = g.n;

  TriMesh mesh;
  mesh.level = level;
  mesh.cells_per_side = n;
  mesh.hypotenuse = std::sqrt(2.0) / static_cast<double>(n);

  mesh.vertices.reserve((n + 1) * (n + 1));
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(static_cast<double>(i) / static_cast<double>(n),
                                 static_cast<double>(j) / static_cast<double>(n));

  mesh.triangles.reserve(2 * n * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const Region r = g.solid_cell(i, j) ? Region::Solid : Region::Fluid;
      for (const auto& tri : g.cell_triangles(i, j)) mesh.triangles.push_back({tri, r});
    }

  mesh.edges.reserve(3 * n * n + 2 * n);
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i < n; ++i)
      mesh.edges.push_back(make_edge(g.id(i, j), g.id(i + 1, j), g.horizontal_tag(i, j)));
  for (Index i = 0; i <= n; ++i)
    for (Index j = 0; j < n; ++j)
      mesh.edges.push_back(make_edge(g.id(i, j), g.id(i, j + 1), g.vertical_tag(i, j)));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (g.anti_diagonal_cell(i, j))
        mesh.edges.push_back(make_edge(g.id(i + 1, j), g.id(i, j + 1), EdgeTag::Interior));
      else
        mesh.edges.push_back(make_edge(g.id(i, j), g.id(i + 1, j + 1), EdgeTag::Interior));
    }
  return mesh;
}

TriMesh refine(const TriMesh& mesh) {
  require(mesh.cells_per_side == 6 * (Index{1} << mesh.level), "refine: mesh is not a benchmark mesh");
  TriMesh child = generate_mesh(mesh.level + 1);
  const Grid fine{child.cells_per_side};

  // Subdivide each parent in fine-grid index space and check every child
  // lands on the slot the canonical numbering assigns to it.
  std::vector<bool> filled(child.triangles.size(), false);
  auto fine_point = [&](Index parent_vertex) {
    const auto [i, j] = mesh.grid_index(parent_vertex);
    return std::array<Index, 2>{2 * i, 2 * j};
  };
  for (const Triangle& parent : mesh.triangles) {
    std::array<std::array<Index, 2>, 3> p{fine_point(parent.v[0]), fine_point(parent.v[1]),
                                          fine_point(parent.v[2])};
    auto mid = [&](int a, int b) {
      return std::array<Index, 2>{(p[a][0] + p[b][0]) / 2, (p[a][1] + p[b][1]) / 2};
    };
    const std::array<std::array<std::array<Index, 2>, 3>, 4> kids{{
        {p[0], mid(0, 1), mid(2, 0)},
        {mid(0, 1), p[1], mid(1, 2)},
        {mid(2, 0), mid(1, 2), p[2]},
        {mid(0, 1), mid(1, 2), mid(2, 0)},
    }};
    for (const auto& k : kids) {
      // Twice the centroid avoids fractions; floor(3*centroid) picks the cell.
      const Index sx = k[0][0] + k[1][0] + k[2][0];
      const Index sy = k[0][1] + k[1][1] + k[2][1];
      const Index ci = sx / 3, cj = sy / 3;
      const auto slots = fine.cell_triangles(ci, cj);
      std::array<Index, 3> ids{fine.id(k[0][0], k[0][1]), fine.id(k[1][0], k[1][1]),
                               fine.id(k[2][0], k[2][1])};
      std::sort(ids.begin(), ids.end());
      bool placed = false;
      for (int s = 0; s < 2; ++s) {
        auto slot = slots[s];
        std::sort(slot.begin(), slot.end());
        if (slot == ids) {
          const Index t = 2 * (cj * fine.n + ci) + s;
          if (child.triangles[t].region != parent.region || filled[t])
            throw NumericalError("mesh", "refine: inconsistent child triangle");
          filled[t] = true;
          placed = true;
        }
      }
      if (!placed) throw NumericalError("mesh", "refine: child triangle does not match the fine grid");
    }
  }
  for (bool f : filled)
    if (!f) throw NumericalError("mesh", "refine: fine grid slot left uncovered");
  return child;
}

void export_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_mesh: cannot open '" + path.string() + "' for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << mesh.num_triangles() << ' ' << mesh.num_vertices() << ' ' << mesh.level << '\n';
  for (Index k = 0; k < mesh.num_vertices(); ++k)
    out << k << ' ' << mesh.vertices[k].x() << ' ' << mesh.vertices[k].y() << '\n';
  for (Index k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    out << k << ' ' << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << region_name(t.region) << '\n';
  }
  for (const auto& e : mesh.edges) out << e.v[0] << ' ' << e.v[1] << ' ' << tag_name(e.tag) << '\n';
  if (!out) throw std::runtime_error("export_mesh: write failed for '" + path.string() + "'");
}

TriMesh import_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_mesh: cannot open '" + path.string() + "'");
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("import_mesh: " + what + " in '" + path.string() + "'");
  };

  Index ntri = 0, nvert = 0;
  TriMesh mesh;
  if (!(in >> ntri >> nvert >> mesh.level)) fail("bad header");
  mesh.vertices.resize(nvert);
  for (Index k = 0; k < nvert; ++k) {
    Index idx;
    double x, y;
    if (!(in >> idx >> x >> y) || idx != k) fail("bad vertex line " + std::to_string(k));
    mesh.vertices[k] = Vector2(x, y);
  }
  mesh.triangles.resize(ntri);
  for (Index k = 0; k < ntri; ++k) {
    Index idx;
    std::string region;
    auto& t = mesh.triangles[k];
    if (!(in >> idx >> t.v[0] >> t.v[1] >> t.v[2] >> region) || idx != k)
      fail("bad triangle line " + std::to_string(k));
    if (region == "fluid") t.region = Region::Fluid;
    else if (region == "solid") t.region = Region::Solid;
    else fail("unknown region '" + region + "'");
  }
  Index a, b;
  std::string tag;
  while (in >> a >> b >> tag) {
    EdgeTag et;
    if (tag == "interior") et = EdgeTag::Interior;
    else if (tag == "gamma_f") et = EdgeTag::GammaF;
    else if (tag == "gamma_s") et = EdgeTag::GammaS;
    else fail("unknown edge tag '" + tag + "'");
    mesh.edges.push_back(Edge{{a, b}, et});
  }
  if (!in.eof()) fail("trailing garbage");

  const Index side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(nvert)))) - 1;
  mesh.cells_per_side = side;
  mesh.hypotenuse = std::sqrt(2.0) / static_cast<double>(side);
  return mesh;
}

} // namespace fsi
