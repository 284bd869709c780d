#include "fsi/oracle.hpp"

#include <Eigen/Eigenvalues>

namespace fsi::oracle {

namespace {

Eigen::MatrixXd dense(const SparseMatrix& a) { return Eigen::MatrixXd(a); }

std::vector<Index> complement(Index n, const std::vector<Index>& taken) {
  std::vector<char> mark(n, 0);
  for (Index i : taken) mark[i] = 1;
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (!mark[i]) out.push_back(i);
  return out;
}

Eigen::MatrixXd solid_operator(const TaylorHoodSpace& space, const MaterialParams& params) {
  const double lam = params.shift;
  return (lam * lam + 1.0) * dense(assemble(space, params, Form::SolidMass)) +
         dense(assemble(space, params, Form::SolidStiffness));
}

} // namespace

FsiState monolithic_solve(const TaylorHoodSpace& space, const MaterialParams& params,
                          const ResolventData& data) {
  params.validate();
  const double lam = params.shift;
  const Eigen::MatrixXd fluid = lam * dense(assemble(space, params, Form::FluidMass)) +
                                dense(assemble(space, params, Form::FluidStrain));
  const Eigen::MatrixXd b = dense(assemble_divergence(space));
  const Eigen::MatrixXd l = solid_operator(space, params);
  const Eigen::MatrixXd ms = dense(assemble(space, params, Form::SolidMass));
  const VectorXd source = ms * (lam * data.w_star + data.z_star);

  const auto free = space.free_velocity_dofs();
  const auto ifv = space.interface_velocity_dofs();
  const auto ifw = space.interface_displacement_dofs();
  const auto interior = complement(space.num_displacement_dofs(), ifw);
  const Index nu = space.num_velocity_dofs(), nw = space.num_displacement_dofs();
  const Index nf = static_cast<Index>(free.size()), np = space.num_pressure_dofs(),
              ni = static_cast<Index>(interior.size());

  // w = T u + t0 + P w_int, with T copying interface velocity into w/lam.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nw, nu);
  VectorXd t0 = VectorXd::Zero(nw);
  for (std::size_t k = 0; k < ifv.size(); ++k) {
    t(ifw[k], ifv[k]) = 1.0 / lam;
    t0(ifw[k]) = data.w_star(ifw[k]) / lam;
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(nw, ni);
  for (Index r = 0; r < ni; ++r) p(interior[r], r) = 1.0;
  // Test functions: fluid phi carries its interface trace to the solid via lam*T.
  const Eigen::MatrixXd tt = lam * t;

  Eigen::MatrixXd uf = Eigen::MatrixXd::Zero(nu, nf);
  for (Index r = 0; r < nf; ++r) uf(free[r], r) = 1.0;

  const Index n = nf + np + ni;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  VectorXd rhs = VectorXd::Zero(n);

  // Momentum rows (fluid test + its solid trace).
  k.block(0, 0, nf, nf) = uf.transpose() * (fluid + tt.transpose() * l * t) * uf;
  k.block(0, nf, nf, np) = uf.transpose() * b.transpose();
  k.block(0, nf + np, nf, ni) = uf.transpose() * tt.transpose() * l * p;
  rhs.head(nf) = uf.transpose() * (data.fluid_load + tt.transpose() * (source - l * t0));
  // Continuity rows.
  k.block(nf, 0, np, nf) = b * uf;
  // Solid interior rows.
  k.block(nf + np, 0, ni, nf) = p.transpose() * l * t * uf;
  k.block(nf + np, nf + np, ni, ni) = p.transpose() * l * p;
  rhs.tail(ni) = p.transpose() * (source - l * t0);

  const VectorXd x = k.fullPivLu().solve(rhs);
  FsiState s;
  s.u = uf * x.head(nf);
  s.pi = x.segment(nf, np);
  s.w = t * s.u + t0 + p * x.tail(ni);
  s.z = lam * s.w - data.w_star;
  return s;
}

VectorXd dirichlet_column(const TaylorHoodSpace& space, const MaterialParams& params, Index interface_dof) {
  require(interface_dof >= 0 && interface_dof < space.num_interface_dofs(), "dirichlet_column: bad interface DOF");
  const auto ifw = space.interface_displacement_dofs();
  const auto interior = complement(space.num_displacement_dofs(), ifw);
  const Eigen::MatrixXd l = solid_operator(space, params);
  VectorXd w = VectorXd::Zero(space.num_displacement_dofs());
  w(ifw[interface_dof]) = 1.0;
  const Index ni = static_cast<Index>(interior.size());
  Eigen::MatrixXd lii(ni, ni);
  VectorXd r(ni);
  for (Index a = 0; a < ni; ++a) {
    r(a) = -l(interior[a], ifw[interface_dof]);
    for (Index b = 0; b < ni; ++b) lii(a, b) = l(interior[a], interior[b]);
  }
  const VectorXd wi = lii.llt().solve(r);
  for (Index a = 0; a < ni; ++a) w(interior[a]) = wi(a);
  return w;
}

VectorXd solid_resolvent_inverse(const TaylorHoodSpace& space, const MaterialParams& params,
                                 const VectorXd& source) {
  const auto interior = complement(space.num_displacement_dofs(), space.interface_displacement_dofs());
  const Eigen::MatrixXd l = solid_operator(space, params);
  const VectorXd f = dense(assemble(space, params, Form::SolidMass)) * source;
  const Index ni = static_cast<Index>(interior.size());
  Eigen::MatrixXd lii(ni, ni);
  VectorXd r(ni);
  for (Index a = 0; a < ni; ++a) {
    r(a) = f(interior[a]);
    for (Index b = 0; b < ni; ++b) lii(a, b) = l(interior[a], interior[b]);
  }
  const VectorXd wi = lii.llt().solve(r);
  VectorXd w = VectorXd::Zero(space.num_displacement_dofs());
  for (Index a = 0; a < ni; ++a) w(interior[a]) = wi(a);
  return w;
}

double smallest_eigenvalue(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, m);
  if (es.info() != Eigen::Success) throw NumericalError("oracle", "dense generalized eigensolve failed");
  return es.eigenvalues().minCoeff();
}

double infsup_beta_squared(const TaylorHoodSpace& space) {
  const MaterialParams params;
  const auto free = space.free_velocity_dofs();
  const Eigen::MatrixXd k = dense(restrict_to(assemble(space, params, Form::FluidStrain), free, free));
  std::vector<Index> all(space.num_pressure_dofs());
  for (Index i = 0; i < space.num_pressure_dofs(); ++i) all[i] = i;
  const Eigen::MatrixXd b = dense(restrict_to(assemble_divergence(space), all, free));
  const Eigen::MatrixXd s = b * k.llt().solve(b.transpose());
  return smallest_eigenvalue(0.5 * (s + s.transpose()), dense(assemble_pressure_mass(space)));
}

Eigen::MatrixXd energy_gram(const TaylorHoodSpace& space, const MaterialParams& params) {
  const Index nu = space.num_velocity_dofs(), nw = space.num_displacement_dofs();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nu + 2 * nw, nu + 2 * nw);
  const Eigen::MatrixXd ms = dense(assemble(space, params, Form::SolidMass));
  g.block(0, 0, nu, nu) = dense(assemble(space, params, Form::FluidMass));
  g.block(nu, nu, nw, nw) = dense(assemble(space, params, Form::SolidStiffness)) + ms;
  g.block(nu + nw, nu + nw, nw, nw) = ms;
  return g;
}

} // namespace fsi::oracle
