#include "fsi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fsi {

FsiState FsiState::zero(const TaylorHoodSpace& space) {
  return {VectorXd::Zero(space.num_velocity_dofs()), VectorXd::Zero(space.num_displacement_dofs()),
          VectorXd::Zero(space.num_displacement_dofs()), std::nullopt};
}

ResolventData ResolventData::zero(const TaylorHoodSpace& space) {
  return {VectorXd::Zero(space.num_velocity_dofs()), VectorXd::Zero(space.num_displacement_dofs()),
          VectorXd::Zero(space.num_displacement_dofs())};
}

ResolventData ResolventData::from_coefficients(const TaylorHoodSpace& space,
                                               const SparseMatrix& fluid_mass, const VectorXd& u_star,
                                               const VectorXd& w_star, const VectorXd& z_star) {
  require(u_star.size() == space.num_velocity_dofs() && w_star.size() == space.num_displacement_dofs() &&
              z_star.size() == space.num_displacement_dofs(),
          "ResolventData: data vectors do not conform to the space");
  return {fluid_mass * u_star, w_star, z_star};
}

// ---------------------------------------------------------------------------
// Dirichlet map

VectorXd DirichletMap::extend(const VectorXd& trace) const {
  require(trace.size() == extension.cols(), "DirichletMap::extend: trace has wrong size");
  return extension * trace;
}

VectorXd DirichletMap::trace(const VectorXd& w) const { return restrict_to(w, interface_dofs); }

VectorXd DirichletMap::interior_residual(const VectorXd& w, const VectorXd& source) const {
  const VectorXd r = solid_operator * w - solid_mass * source;
  return restrict_to(r, interior_dofs);
}

DirichletMap dirichlet_map(const TaylorHoodSpace& space, const MaterialParams& params) {
  params.validate();
  DirichletMap map;
  map.params = params;
  map.solid_mass = assemble(space, params, Form::SolidMass);
  map.solid_stiffness = assemble(space, params, Form::SolidStiffness);
  const double lam = params.shift;
  map.solid_operator = (lam * lam + 1.0) * map.solid_mass + map.solid_stiffness;

  map.interface_dofs = space.interface_displacement_dofs();
  std::vector<char> is_interface(space.num_displacement_dofs(), 0);
  for (Index d : map.interface_dofs) is_interface[d] = 1;
  for (Index d = 0; d < space.num_displacement_dofs(); ++d)
    if (!is_interface[d]) map.interior_dofs.push_back(d);

  const SparseMatrix l_ii = restrict_to(map.solid_operator, map.interior_dofs, map.interior_dofs);
  const SparseMatrix l_ig = restrict_to(map.solid_operator, map.interior_dofs, map.interface_dofs);
  try {
    map.interior_lu = std::make_shared<const SparseLu>(l_ii);
  } catch (const NumericalError& e) {
    throw NumericalError("solver", std::string("internal error: solid operator is singular (") + e.what() + ")");
  }

  const Index ni = static_cast<Index>(map.interface_dofs.size());
  map.extension = Eigen::MatrixXd::Zero(space.num_displacement_dofs(), ni);
  const Eigen::MatrixXd interior = -map.interior_lu->solve(Eigen::MatrixXd(l_ig));
  for (Index i = 0; i < ni; ++i) {
    map.extension(map.interface_dofs[i], i) = 1.0;
    for (std::size_t r = 0; r < map.interior_dofs.size(); ++r)
      map.extension(map.interior_dofs[r], i) = interior(static_cast<Index>(r), i);
  }
  return map;
}

VectorXd solid_resolvent_inverse(const DirichletMap& map, const VectorXd& source) {
  require(source.size() == map.solid_mass.rows(), "solid_resolvent_inverse: source has wrong size");
  const VectorXd load = restrict_to(VectorXd(map.solid_mass * source), map.interior_dofs);
  const VectorXd wi = map.interior_lu->solve(load);
  VectorXd w = VectorXd::Zero(source.size());
  for (std::size_t r = 0; r < map.interior_dofs.size(); ++r) w(map.interior_dofs[r]) = wi(static_cast<Index>(r));
  return w;
}

VectorXd solid_resolvent_inverse(const TaylorHoodSpace& space, const MaterialParams& params,
                                 const VectorXd& source) {
  return solid_resolvent_inverse(dirichlet_map(space, params), source);
}

// ---------------------------------------------------------------------------
// Saddle system

SparseMatrix SaddleSystem::matrix() const {
  const Index nv = a_lambda.rows(), np = b.rows();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a_lambda.nonZeros() + 2 * b.nonZeros());
  for (Index k = 0; k < a_lambda.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a_lambda, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < b.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
      trips.emplace_back(nv + it.row(), it.col(), it.value());
      trips.emplace_back(it.col(), nv + it.row(), it.value());
    }
  SparseMatrix k(nv + np, nv + np);
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

VectorXd SaddleSystem::rhs() const {
  VectorXd r(rhs_velocity.size() + rhs_pressure.size());
  r << rhs_velocity, rhs_pressure;
  return r;
}

ResolventSolver::ResolventSolver(const TaylorHoodSpace& space, const MaterialParams& params)
    : space_(std::make_shared<const TaylorHoodSpace>(space)), params_(params) {
  params.validate();
  fluid_mass_ = fsi::assemble(space, params, Form::FluidMass);
  fluid_strain_ = fsi::assemble(space, params, Form::FluidStrain);
  divergence_ = assemble_divergence(space);
  dirichlet_ = dirichlet_map(space, params);
  interface_velocity_dofs_ = space.interface_velocity_dofs();

  const double lam = params.shift;
  auto& sys = system_;
  sys.free_velocity_dofs = space.free_velocity_dofs();
  const Eigen::MatrixXd& e = dirichlet_.extension;
  sys.interface_block = (e.transpose() * (dirichlet_.solid_operator * e)) / lam;

  // Velocity block over all DOFs, then symmetric elimination of Gamma_f.
  std::vector<Eigen::Triplet<double>> trips;
  const SparseMatrix fluid = lam * fluid_mass_ + fluid_strain_;
  for (Index k = 0; k < fluid.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(fluid, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  const Index ni = static_cast<Index>(interface_velocity_dofs_.size());
  for (Index i = 0; i < ni; ++i)
    for (Index j = 0; j < ni; ++j)
      trips.emplace_back(interface_velocity_dofs_[i], interface_velocity_dofs_[j], sys.interface_block(i, j));
  SparseMatrix a_full(space.num_velocity_dofs(), space.num_velocity_dofs());
  a_full.setFromTriplets(trips.begin(), trips.end());

  sys.a_lambda = restrict_to(a_full, sys.free_velocity_dofs, sys.free_velocity_dofs);
  std::vector<Index> all_p(space.num_pressure_dofs());
  for (Index p = 0; p < space.num_pressure_dofs(); ++p) all_p[p] = p;
  sys.b = restrict_to(divergence_, all_p, sys.free_velocity_dofs);
  sys.rhs_velocity = VectorXd::Zero(sys.a_lambda.rows());
  sys.rhs_pressure = VectorXd::Zero(sys.b.rows());
  sys.w0 = VectorXd::Zero(space.num_displacement_dofs());

  lu_ = std::make_shared<const SparseLu>(sys.matrix());
}

VectorXd ResolventSolver::data_displacement(const ResolventData& data) const {
  const double lam = params_.shift;
  return dirichlet_.extend(dirichlet_.trace(data.w_star)) / lam +
         solid_resolvent_inverse(dirichlet_, lam * data.w_star + data.z_star);
}

VectorXd ResolventSolver::rhs_velocity(const ResolventData& data, const VectorXd& w0) const {
  const double lam = params_.shift;
  // Solid data terms tested with E(phi|Gs): E^T [M (lam w* + z*) - L w0].
  const VectorXd solid = dirichlet_.solid_mass * (lam * data.w_star + data.z_star) - dirichlet_.solid_operator * w0;
  const VectorXd coupled = dirichlet_.extension.transpose() * solid;
  VectorXd f = data.fluid_load;
  for (std::size_t i = 0; i < interface_velocity_dofs_.size(); ++i)
    f(interface_velocity_dofs_[i]) += coupled(static_cast<Index>(i));
  return restrict_to(f, system_.free_velocity_dofs);
}

SaddleSystem ResolventSolver::assemble(const ResolventData& data) const {
  require(data.fluid_load.size() == space_->num_velocity_dofs() &&
              data.w_star.size() == space_->num_displacement_dofs() &&
              data.z_star.size() == space_->num_displacement_dofs(),
          "assemble_system: data does not conform to the space");
  SaddleSystem sys = system_;
  sys.w0 = data_displacement(data);
  sys.rhs_velocity = rhs_velocity(data, sys.w0);
  return sys;
}

ResolventSolution ResolventSolver::solve(const ResolventData& data) const {
  require(data.fluid_load.size() == space_->num_velocity_dofs() &&
              data.w_star.size() == space_->num_displacement_dofs() &&
              data.z_star.size() == space_->num_displacement_dofs(),
          "solve_resolvent: data does not conform to the space");
  const double lam = params_.shift;
  const VectorXd w0 = data_displacement(data);
  VectorXd rhs = VectorXd::Zero(lu_->rows());
  rhs.head(system_.a_lambda.rows()) = rhs_velocity(data, w0);

  ResolventSolution out;
  const VectorXd x = lu_->solve(rhs, &out.report);

  FsiState& s = out.state;
  s.u = VectorXd::Zero(space_->num_velocity_dofs());
  for (std::size_t k = 0; k < system_.free_velocity_dofs.size(); ++k)
    s.u(system_.free_velocity_dofs[k]) = x(static_cast<Index>(k));
  s.pi = x.tail(system_.b.rows());

  const VectorXd u_trace = restrict_to(s.u, interface_velocity_dofs_);
  s.w = dirichlet_.extend(u_trace) / lam + w0;
  s.z = lam * s.w - data.w_star;
  return out;
}

double ResolventSolver::a_lambda(const VectorXd& v) const {
  const VectorXd vf = restrict_to(v, system_.free_velocity_dofs);
  return vf.dot(system_.a_lambda * vf);
}

SaddleSystem assemble_system(const TaylorHoodSpace& space, const MaterialParams& params,
                             const ResolventData& data) {
  return ResolventSolver(space, params).assemble(data);
}

ResolventSolution solve_resolvent(const TaylorHoodSpace& space, const MaterialParams& params,
                                  const ResolventData& data) {
  return ResolventSolver(space, params).solve(data);
}

// ---------------------------------------------------------------------------
// Pressure and interface tractions

PressureSplit decompose_pressure(const TaylorHoodSpace& space, const VectorXd& pi) {
  require(pi.size() == space.num_pressure_dofs(), "decompose_pressure: pressure has wrong size");
  // Integral of each P1 basis function: area/3 per incident fluid triangle.
  VectorXd weights = VectorXd::Zero(pi.size());
  for (Index t : space.fluid_triangles) {
    const double a = space.mesh->triangle_area(t) / 3.0;
    for (Index p : space.element_pressure[t]) weights(p) += a;
  }
  const double c0 = weights.dot(pi) / weights.sum();
  return {(pi.array() - c0).matrix(), c0};
}

VectorXd fluid_traction(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi,
                        const ResolventData& data) {
  require(state.u.size() == solver.space().num_velocity_dofs() &&
              pi.size() == solver.space().num_pressure_dofs(),
          "fluid_traction: state does not conform to the space");
  const double lam = solver.params().shift;
  return lam * (solver.fluid_mass() * state.u) + solver.fluid_strain() * state.u +
         solver.divergence().transpose() * pi - data.fluid_load;
}

double interface_flux_extended(const ResolventSolver& solver, const FsiState& state,
                               const VectorXd& pi, const ResolventData& data,
                               const VectorXd& extension) {
  const auto& space = solver.space();
  require(extension.size() == space.num_velocity_dofs(), "interface_flux: extension has wrong size");
  for (Index d : space.constrained_velocity_dofs())
    require(extension(d) == 0.0, "interface_flux: extension must vanish on Gamma_f");
  return extension.dot(fluid_traction(solver, state, pi, data));
}

double interface_flux(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi,
                      const ResolventData& data, const VectorXd& trace) {
  const auto& space = solver.space();
  require(trace.size() == space.num_interface_dofs(), "interface_flux: g is not an interface trace");
  VectorXd ext = VectorXd::Zero(space.num_velocity_dofs());
  const auto dofs = space.interface_velocity_dofs();
  for (std::size_t i = 0; i < dofs.size(); ++i) ext(dofs[i]) = trace(static_cast<Index>(i));
  return interface_flux_extended(solver, state, pi, data, ext);
}

VectorXd solid_traction(const ResolventSolver& solver, const FsiState& state,
                        const ResolventData& data) {
  const auto& map = solver.dirichlet();
  const double lam = solver.params().shift;
  // Green's formula on the solid with nu pointing inward:
  // <sigma(w) nu, g> = -[(sigma(w), eps(Eg)) + (lam^2+1)(w, Eg) - (lam w* + z*, Eg)].
  const VectorXd r = map.solid_operator * state.w - map.solid_mass * (lam * data.w_star + data.z_star);
  return -restrict_to(r, map.interface_dofs);
}

namespace {

struct InterfaceEdge {
  Index fluid_triangle;
  Index solid_triangle;
  std::array<Index, 2> v;
  Vector2 normal; // into the solid
};

std::vector<InterfaceEdge> interface_edges(const TaylorHoodSpace& space) {
  const TriMesh& mesh = *space.mesh;
  std::map<std::pair<Index, Index>, std::array<Index, 2>> owners;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    for (int a = 0; a < 3; ++a) {
      const Index p = std::min(v[a], v[(a + 1) % 3]), q = std::max(v[a], v[(a + 1) % 3]);
      auto& o = owners.try_emplace({p, q}, std::array<Index, 2>{-1, -1}).first->second;
      o[mesh.triangles[t].region == Region::Fluid ? 0 : 1] = t;
    }
  }
  std::vector<InterfaceEdge> out;
  for (const auto& e : mesh.edges) {
    if (e.tag != EdgeTag::GammaS) continue;
    const auto& o = owners.at({e.v[0], e.v[1]});
    if (o[0] < 0 || o[1] < 0) throw NumericalError("solver", "interface edge is not shared by fluid and solid");
    const Vector2 t = mesh.vertices[e.v[1]] - mesh.vertices[e.v[0]];
    Vector2 n(-t.y(), t.x());
    n.normalize();
    const Vector2 mid = 0.5 * (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]);
    if (n.dot(mesh.centroid(o[1]) - mid) < 0) n = -n;
    out.push_back({o[0], o[1], e.v, n});
  }
  return out;
}

Vector2 reference_coordinates(const TaylorHoodSpace& space, Index triangle, const Vector2& x) {
  const AffineMap<double> map(space.corners(triangle));
  return map.jacobian.inverse() * (x - map.origin);
}

} // namespace

VectorXd interface_normal_trace(const TaylorHoodSpace& space) {
  const auto edges = interface_edges(space);
  // Distinct side normals touching each interface node.
  std::vector<std::vector<Vector2>> normals(space.interface.size());
  std::map<Index, Index> by_fluid_node;
  for (std::size_t k = 0; k < space.interface.size(); ++k) by_fluid_node[space.interface[k].fluid_node] = static_cast<Index>(k);
  auto add = [&](Index fluid_node, const Vector2& n) {
    auto& list = normals[by_fluid_node.at(fluid_node)];
    for (const auto& m : list)
      if ((m - n).norm() < 1e-12) return;
    list.push_back(n);
  };
  for (const auto& e : edges) {
    // Local P2 nodes of the fluid triangle lying on this edge.
    const auto& tri = space.mesh->triangles[e.fluid_triangle].v;
    const auto& nodes = space.element_nodes[e.fluid_triangle];
    for (int a = 0; a < 3; ++a) {
      const Index p = tri[a], q = tri[(a + 1) % 3];
      if (std::minmax(p, q) != std::minmax(e.v[0], e.v[1])) continue;
      add(nodes[a], e.normal);
      add(nodes[(a + 1) % 3], e.normal);
      add(nodes[3 + a], e.normal);
    }
  }
  VectorXd g = VectorXd::Zero(space.num_interface_dofs());
  for (std::size_t k = 0; k < normals.size(); ++k)
    for (const auto& n : normals[k]) g.segment<2>(2 * static_cast<Index>(k)) += n;
  return g;
}

double recover_c0(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi_q0,
                  const ResolventData& data, FluxEvaluation mode) {
  const auto& space = solver.space();
  require(pi_q0.size() == space.num_pressure_dofs(), "recover_c0: q0 has wrong size");
  const double length = space.interface_length();

  if (mode == FluxEvaluation::Variational) {
    // <(eps(u) nu - sigma(w) nu).nu, 1> - int q0 = F_q0(g) - S(g) for the
    // normal trace g, because g.nu = 1 on every side.
    const VectorXd g = interface_normal_trace(space);
    const double fluid = interface_flux(solver, state, pi_q0, data, g);
    const double solid = g.dot(solid_traction(solver, state, data));
    return (fluid - solid) / length;
  }

  const auto edges = interface_edges(space);
  std::vector<double> gx, gw;
  gauss_legendre_unit<double>(3, gx, gw);
  const auto& p = solver.params();
  double integral = 0;
  for (const auto& e : edges) {
    const Vector2 a = space.mesh->vertices[e.v[0]], b = space.mesh->vertices[e.v[1]];
    const double len = (b - a).norm();
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const Vector2 x = a + gx[q] * (b - a);
      const auto fu = evaluate_vector(space, e.fluid_triangle, state.u, reference_coordinates(space, e.fluid_triangle, x));
      const auto sw = evaluate_vector(space, e.solid_triangle, state.w, reference_coordinates(space, e.solid_triangle, x));
      const Eigen::Matrix2d eps_u = 0.5 * (fu.gradient + fu.gradient.transpose());
      const Eigen::Matrix2d eps_w = 0.5 * (sw.gradient + sw.gradient.transpose());
      const Eigen::Matrix2d sigma_w = p.lame_lambda * eps_w.trace() * Eigen::Matrix2d::Identity() + 2.0 * p.lame_mu * eps_w;
      const double q0 = evaluate_pressure(space, e.fluid_triangle, pi_q0, reference_coordinates(space, e.fluid_triangle, x));
      integral += gw[q] * len * (e.normal.dot(eps_u * e.normal) - e.normal.dot(sigma_w * e.normal) - q0);
    }
  }
  return integral / length;
}

bool DomainConditionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

DomainConditionReport check_domain_conditions(const ResolventSolver& solver, const FsiState& state,
                                              const VectorXd& pi, const ResolventData& data) {
  const auto& space = solver.space();
  require(state.u.size() == space.num_velocity_dofs() && state.w.size() == space.num_displacement_dofs() &&
              state.z.size() == space.num_displacement_dofs() && pi.size() == space.num_pressure_dofs(),
          "check_domain_conditions: state does not conform to the space");
  DomainConditionReport report;
  auto add = [&](std::string name, double residual, double tol, double scale) {
    const double t = tol * std::max(1.0, scale);
    report.checks.push_back({std::move(name), residual, t, residual <= t});
  };
  const double u_scale = state.u.size() ? state.u.cwiseAbs().maxCoeff() : 0.0;

  double gamma_f = 0;
  for (Index d : space.constrained_velocity_dofs()) gamma_f = std::max(gamma_f, std::abs(state.u(d)));
  add("u = 0 on Gamma_f", gamma_f, kGammaFTolerance, 0.0);

  const VectorXd u_trace = restrict_to(state.u, space.interface_velocity_dofs());
  const VectorXd z_trace = restrict_to(state.z, space.interface_displacement_dofs());
  add("z = u on Gamma_s", (z_trace - u_trace).cwiseAbs().maxCoeff(), kTraceTolerance, u_scale);

  const VectorXd div = solver.divergence() * state.u;
  add("div u orthogonal to pressures", div.cwiseAbs().maxCoeff(), kDivergenceTolerance, u_scale);

  const VectorXd fluid = restrict_to(fluid_traction(solver, state, pi, data), space.interface_velocity_dofs());
  const VectorXd solid = solid_traction(solver, state, data);
  add("traction balance on Gamma_s", (fluid - solid).cwiseAbs().maxCoeff(), kFluxTolerance,
      std::max(fluid.cwiseAbs().maxCoeff(), data.fluid_load.cwiseAbs().maxCoeff()));
  return report;
}

} // namespace fsi
