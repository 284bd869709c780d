#include "fsi/fem.hpp"

#include <algorithm>
#include <unordered_map>

namespace fsi {

void MaterialParams::validate() const {
  require(lame_mu > 0.0, "MaterialParams: lame_mu must be positive");
  require(lame_lambda >= 0.0, "MaterialParams: lame_lambda must be nonnegative");
  require(shift > 0.0, "MaterialParams: shift must be positive");
}

const QuadratureRule<double>& system_rule() {
  static const auto rule = triangle_rule<double>(kSystemQuadratureDegree);
  return rule;
}

const QuadratureRule<double>& error_rule() {
  static const auto rule = triangle_rule<double>(kErrorQuadratureDegree);
  return rule;
}

TaylorHoodSpace build_space(const TriMesh& mesh) {
  return build_space(std::make_shared<const TriMesh>(mesh));
}

TaylorHoodSpace build_space(std::shared_ptr<const TriMesh> mesh_ptr) {
  require(mesh_ptr != nullptr, "build_space: null mesh");
  const TriMesh& mesh = *mesh_ptr;
  const Index nv = mesh.num_vertices();

  // Global P2 node ids: vertices first, then one per edge.
  std::unordered_map<Index, Index> edge_of;
  edge_of.reserve(mesh.edges.size() * 2);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    edge_of.emplace(mesh.edges[e].v[0] * nv + mesh.edges[e].v[1], static_cast<Index>(e));
  auto edge_node = [&](Index a, Index b) {
    const auto it = edge_of.find(std::min(a, b) * nv + std::max(a, b));
    if (it == edge_of.end()) throw ContractViolation("build_space: triangle edge missing from edge list");
    return nv + it->second;
  };
  const Index n_global = nv + static_cast<Index>(mesh.edges.size());

  std::vector<std::array<Index, 6>> global_nodes(mesh.triangles.size());
  std::vector<char> in_fluid(n_global, 0), in_solid(n_global, 0), fluid_vertex(nv, 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& v = mesh.triangles[t].v;
    global_nodes[t] = {v[0], v[1], v[2], edge_node(v[0], v[1]), edge_node(v[1], v[2]),
                       edge_node(v[2], v[0])};
    auto& mark = mesh.triangles[t].region == Region::Fluid ? in_fluid : in_solid;
    for (Index g : global_nodes[t]) mark[g] = 1;
    if (mesh.triangles[t].region == Region::Fluid)
      for (Index g : v) fluid_vertex[g] = 1;
  }

  auto coordinate = [&](Index g) -> Vector2 {
    if (g < nv) return mesh.vertices[g];
    const auto& e = mesh.edges[g - nv];
    return 0.5 * (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]);
  };
  auto on_gamma_f = [&](Index g) {
    return g < nv ? mesh.on_outer_boundary(g) : mesh.edges[g - nv].tag == EdgeTag::GammaF;
  };
  auto on_gamma_s = [&](Index g) {
    return g < nv ? mesh.on_interface(g) : mesh.edges[g - nv].tag == EdgeTag::GammaS;
  };

  TaylorHoodSpace space;
  space.mesh = std::move(mesh_ptr);
  std::vector<Index> fluid_id(n_global, -1), solid_id(n_global, -1), pressure_id(nv, -1);
  for (Index g = 0; g < n_global; ++g) {
    if (in_fluid[g]) {
      fluid_id[g] = static_cast<Index>(space.fluid_nodes.size());
      space.fluid_nodes.push_back(coordinate(g));
      space.fluid_node_on_gamma_f.push_back(on_gamma_f(g));
    }
    if (in_solid[g]) {
      solid_id[g] = static_cast<Index>(space.solid_nodes.size());
      space.solid_nodes.push_back(coordinate(g));
    }
    if (in_fluid[g] && in_solid[g]) {
      if (!on_gamma_s(g)) throw NumericalError("fem", "node shared by both regions is not tagged as interface");
      space.interface.push_back({fluid_id[g], solid_id[g]});
    }
  }
  for (Index v = 0; v < nv; ++v)
    if (fluid_vertex[v]) {
      pressure_id[v] = static_cast<Index>(space.pressure_vertices.size());
      space.pressure_vertices.push_back(v);
    }

  space.element_nodes.resize(mesh.triangles.size());
  space.element_pressure.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const bool fluid = mesh.triangles[t].region == Region::Fluid;
    const auto& ids = fluid ? fluid_id : solid_id;
    for (int a = 0; a < 6; ++a) space.element_nodes[t][a] = ids[global_nodes[t][a]];
    for (int a = 0; a < 3; ++a)
      space.element_pressure[t][a] = fluid ? pressure_id[mesh.triangles[t].v[a]] : -1;
    (fluid ? space.fluid_triangles : space.solid_triangles).push_back(static_cast<Index>(t));
  }
  return space;
}

std::vector<Index> TaylorHoodSpace::free_velocity_dofs() const {
  std::vector<Index> out;
  for (std::size_t n = 0; n < fluid_nodes.size(); ++n)
    if (!fluid_node_on_gamma_f[n])
      for (Index c = 0; c < 2; ++c) out.push_back(2 * static_cast<Index>(n) + c);
  return out;
}

std::vector<Index> TaylorHoodSpace::constrained_velocity_dofs() const {
  std::vector<Index> out;
  for (std::size_t n = 0; n < fluid_nodes.size(); ++n)
    if (fluid_node_on_gamma_f[n])
      for (Index c = 0; c < 2; ++c) out.push_back(2 * static_cast<Index>(n) + c);
  return out;
}

std::vector<Index> TaylorHoodSpace::interface_velocity_dofs() const {
  std::vector<Index> out;
  for (const auto& k : interface)
    for (Index c = 0; c < 2; ++c) out.push_back(2 * k.fluid_node + c);
  return out;
}

std::vector<Index> TaylorHoodSpace::interface_displacement_dofs() const {
  std::vector<Index> out;
  for (const auto& k : interface)
    for (Index c = 0; c < 2; ++c) out.push_back(2 * k.solid_node + c);
  return out;
}

Eigen::Matrix<double, 2, 3> TaylorHoodSpace::corners(Index triangle) const {
  Eigen::Matrix<double, 2, 3> c;
  for (int a = 0; a < 3; ++a) c.col(a) = mesh->vertices[mesh->triangles[triangle].v[a]];
  return c;
}

double TaylorHoodSpace::fluid_area() const {
  double a = 0;
  for (Index t : fluid_triangles) a += mesh->triangle_area(t);
  return a;
}

double TaylorHoodSpace::solid_area() const {
  double a = 0;
  for (Index t : solid_triangles) a += mesh->triangle_area(t);
  return a;
}

double TaylorHoodSpace::interface_length() const {
  double l = 0;
  for (const auto& e : mesh->edges)
    if (e.tag == EdgeTag::GammaS) l += (mesh->vertices[e.v[1]] - mesh->vertices[e.v[0]]).norm();
  return l;
}

namespace {

bool is_fluid_form(Form f) {
  return f == Form::FluidMass || f == Form::FluidStrain || f == Form::FluidGradient ||
         f == Form::Divergence;
}

const char* form_name(Form f) {
  switch (f) {
  case Form::FluidMass: return "fluid_mass";
  case Form::FluidStrain: return "fluid_strain";
  case Form::FluidGradient: return "fluid_gradient";
  case Form::Divergence: return "divergence";
  case Form::SolidMass: return "solid_mass";
  case Form::SolidStiffness: return "solid_stiffness";
  }
  return "?";
}

} // namespace

Eigen::MatrixXd element_matrix(const TaylorHoodSpace& space, Index triangle,
                               const MaterialParams& params, Form form) {
  require(triangle >= 0 && triangle < space.mesh->num_triangles(), "element_matrix: triangle out of range");
  const bool fluid = space.mesh->triangles[triangle].region == Region::Fluid;
  if (fluid != is_fluid_form(form))
    throw ContractViolation(std::string("element_matrix: form ") + form_name(form) +
                            " used on a " + (fluid ? "fluid" : "solid") + " triangle");
  using K = P2VectorKernels<double>;
  const auto c = space.corners(triangle);
  const auto& rule = system_rule();
  switch (form) {
  case Form::FluidMass:
  case Form::SolidMass: return K::mass(c, rule);
  case Form::FluidStrain: return K::strain(c, rule, 1.0, 0.0);
  case Form::FluidGradient: return K::gradient(c, rule);
  case Form::Divergence: return K::divergence(c, rule);
  case Form::SolidStiffness: return K::strain(c, rule, 2.0 * params.lame_mu, params.lame_lambda);
  }
  throw ContractViolation("element_matrix: unknown form");
}

SparseMatrix assemble(const TaylorHoodSpace& space, const MaterialParams& params, Form form) {
  require(form != Form::Divergence, "assemble: use assemble_divergence for the divergence form");
  const bool fluid = is_fluid_form(form);
  const auto& tris = fluid ? space.fluid_triangles : space.solid_triangles;
  const Index n = fluid ? space.num_velocity_dofs() : space.num_displacement_dofs();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(tris.size() * 144);
  for (Index t : tris) {
    const Eigen::MatrixXd local = element_matrix(space, t, params, form);
    const auto& nodes = space.element_nodes[t];
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b)
        trips.emplace_back(2 * nodes[a / 2] + a % 2, 2 * nodes[b / 2] + b % 2, local(a, b));
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(0.0);
  return m;
}

SparseMatrix assemble_divergence(const TaylorHoodSpace& space) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(space.fluid_triangles.size() * 36);
  for (Index t : space.fluid_triangles) {
    const Eigen::MatrixXd local = element_matrix(space, t, MaterialParams{}, Form::Divergence);
    const auto& nodes = space.element_nodes[t];
    for (int r = 0; r < 3; ++r)
      for (int a = 0; a < 12; ++a)
        trips.emplace_back(space.element_pressure[t][r], 2 * nodes[a / 2] + a % 2, local(r, a));
  }
  SparseMatrix b(space.num_pressure_dofs(), space.num_velocity_dofs());
  b.setFromTriplets(trips.begin(), trips.end());
  b.prune(0.0);
  return b;
}

SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space) {
  std::vector<Eigen::Triplet<double>> trips;
  for (Index t : space.fluid_triangles) {
    const auto local = P2VectorKernels<double>::p1_mass(space.corners(t), system_rule());
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s)
        trips.emplace_back(space.element_pressure[t][r], space.element_pressure[t][s], local(r, s));
  }
  SparseMatrix m(space.num_pressure_dofs(), space.num_pressure_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

VectorXd interpolate(const TaylorHoodSpace& space, const VectorField& f, Field target) {
  require(target != Field::Pressure, "interpolate: vector field cannot target the pressure space");
  const auto& nodes = target == Field::Velocity ? space.fluid_nodes : space.solid_nodes;
  VectorXd out(2 * static_cast<Index>(nodes.size()));
  for (std::size_t n = 0; n < nodes.size(); ++n) out.segment<2>(2 * n) = f(nodes[n]);
  return out;
}

VectorXd interpolate(const TaylorHoodSpace& space, const ScalarField& f) {
  VectorXd out(space.num_pressure_dofs());
  for (Index k = 0; k < space.num_pressure_dofs(); ++k)
    out(k) = f(space.mesh->vertices[space.pressure_vertices[k]]);
  return out;
}

VectorXd load_vector(const TaylorHoodSpace& space, const VectorField& f, Field target) {
  require(target != Field::Pressure, "load_vector: vector field cannot target the pressure space");
  const bool fluid = target == Field::Velocity;
  const auto& tris = fluid ? space.fluid_triangles : space.solid_triangles;
  VectorXd out = VectorXd::Zero(fluid ? space.num_velocity_dofs() : space.num_displacement_dofs());
  const auto& rule = error_rule();
  for (Index t : tris) {
    const AffineMap<double> map(space.corners(t));
    const auto& nodes = space.element_nodes[t];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto n = ReferenceP2<double>::values(rule.points[q]);
      const Vector2 value = f(map(rule.points[q]));
      const double w = rule.weights[q] * std::abs(map.det);
      for (int a = 0; a < 6; ++a) out.segment<2>(2 * nodes[a]) += w * n(a) * value;
    }
  }
  return out;
}

PointEvaluation evaluate_vector(const TaylorHoodSpace& space, Index triangle,
                                const VectorXd& coefficients, const Vector2& reference_point) {
  const AffineMap<double> map(space.corners(triangle));
  const auto n = ReferenceP2<double>::values(reference_point);
  const auto g = map.physical_gradients(ReferenceP2<double>::gradients(reference_point));
  PointEvaluation out{Vector2::Zero(), Eigen::Matrix2d::Zero()};
  const auto& nodes = space.element_nodes[triangle];
  for (int a = 0; a < 6; ++a) {
    const Vector2 c = coefficients.segment<2>(2 * nodes[a]);
    out.value += n(a) * c;
    out.gradient += c * g.row(a);
  }
  return out;
}

double evaluate_pressure(const TaylorHoodSpace& space, Index triangle, const VectorXd& pressure,
                         const Vector2& reference_point) {
  const auto p = ReferenceP1<double>::values(reference_point);
  double v = 0;
  for (int a = 0; a < 3; ++a) v += p(a) * pressure(space.element_pressure[triangle][a]);
  return v;
}

VectorXd restrict_to(const VectorXd& x, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = x(idx[k]);
  return out;
}

SparseMatrix restrict_to(const SparseMatrix& a, const std::vector<Index>& rows,
                         const std::vector<Index>& cols) {
  std::vector<Index> row_map(a.rows(), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) row_map[rows[k]] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (SparseMatrix::InnerIterator it(a, cols[k]); it; ++it)
      if (row_map[it.row()] >= 0) trips.emplace_back(row_map[it.row()], static_cast<Index>(k), it.value());
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

} // namespace fsi
