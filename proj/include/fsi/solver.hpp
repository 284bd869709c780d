#pragma once

#include "fsi/fem.hpp"
#include "fsi/sparse.hpp"

#include <optional>
#include <string>

namespace fsi {

/// State [u, w, z] of the coupled system plus, after a solve, the pressure.
/// u spans every fluid velocity DOF; its Gamma_f rows are zero.
struct FsiState {
  VectorXd u;
  VectorXd w;
  VectorXd z;
  std::optional<VectorXd> pi;

  static FsiState zero(const TaylorHoodSpace& space);
};

/// Right-hand side Y* = (u*, w*, z*) of (lambda I - A) Y = Y*. The fluid
/// datum enters only through its load vector (u*, phi_i), so closed-form
/// data can be integrated with the high-degree rule.
struct ResolventData {
  VectorXd fluid_load;
  VectorXd w_star;
  VectorXd z_star;

  static ResolventData zero(const TaylorHoodSpace& space);
  /// Data from coefficient vectors; fluid_load = M_f u*.
  static ResolventData from_coefficients(const TaylorHoodSpace& space, const SparseMatrix& fluid_mass,
                                         const VectorXd& u_star, const VectorXd& w_star,
                                         const VectorXd& z_star);
};

/// Discrete lambda-harmonic extension of interface traces into the solid,
/// and the zero-trace inverse of L_lambda = (lambda^2 + 1) M + K.
struct DirichletMap {
  MaterialParams params;
  SparseMatrix solid_mass;
  SparseMatrix solid_stiffness;    // (sigma(w), eps(w~))
  SparseMatrix solid_operator;     // (lambda^2 + 1) M + K
  std::vector<Index> interface_dofs; // displacement DOF of each interface DOF
  std::vector<Index> interior_dofs;
  std::shared_ptr<const SparseLu> interior_lu;
  /// Column i: extension of the i-th interface basis trace.
  Eigen::MatrixXd extension;

  VectorXd extend(const VectorXd& trace) const;
  VectorXd trace(const VectorXd& w) const;
  /// Galerkin residual on interior rows: (L w - M f)_I.
  VectorXd interior_residual(const VectorXd& w, const VectorXd& source) const;
};

DirichletMap dirichlet_map(const TaylorHoodSpace& space, const MaterialParams& params);

/// Zero-trace w with (L_lambda w, psi) = (source, psi) for every interior psi.
/// `source` holds displacement coefficients.
VectorXd solid_resolvent_inverse(const DirichletMap& map, const VectorXd& source);
VectorXd solid_resolvent_inverse(const TaylorHoodSpace& space, const MaterialParams& params,
                                 const VectorXd& source);

/// [A_lambda B^T; B 0] on the free velocity DOFs.
struct SaddleSystem {
  SparseMatrix a_lambda;
  SparseMatrix b;
  VectorXd rhs_velocity;
  VectorXd rhs_pressure;
  std::vector<Index> free_velocity_dofs;
  /// Interface coupling (1/lambda) E^T L E as assembled, before it is
  /// added into a_lambda. Indexed by interface DOF.
  Eigen::MatrixXd interface_block;
  /// Data part of the displacement: (1/lambda) E w*|_Gs + L^{-1}(lambda w* + z*).
  VectorXd w0;

  SparseMatrix matrix() const;
  VectorXd rhs() const;
};

struct ResolventSolution {
  FsiState state; // state.pi is set
  LinearSolveReport report;
};

/// Static resolvent solver. Matrices, the Dirichlet map and the saddle
/// factorization are built once and shared by every right-hand side.
class ResolventSolver {
public:
  ResolventSolver(const TaylorHoodSpace& space, const MaterialParams& params);

  SaddleSystem assemble(const ResolventData& data) const;
  ResolventSolution solve(const ResolventData& data) const;

  const TaylorHoodSpace& space() const { return *space_; }
  const MaterialParams& params() const { return params_; }
  const DirichletMap& dirichlet() const { return dirichlet_; }
  const SparseMatrix& fluid_mass() const { return fluid_mass_; }
  const SparseMatrix& fluid_strain() const { return fluid_strain_; }
  /// Divergence form over all velocity DOFs (Gamma_f columns included).
  const SparseMatrix& divergence() const { return divergence_; }
  const SaddleSystem& system() const { return system_; }

  /// a_lambda(v, v) for a full velocity vector (Gamma_f rows ignored).
  double a_lambda(const VectorXd& v) const;

private:
  VectorXd data_displacement(const ResolventData& data) const;
  VectorXd rhs_velocity(const ResolventData& data, const VectorXd& w0) const;

  std::shared_ptr<const TaylorHoodSpace> space_;
  MaterialParams params_;
  SparseMatrix fluid_mass_;
  SparseMatrix fluid_strain_;
  SparseMatrix divergence_;
  DirichletMap dirichlet_;
  std::vector<Index> interface_velocity_dofs_;
  SaddleSystem system_; // data-free parts
  std::shared_ptr<const SparseLu> lu_;
};

SaddleSystem assemble_system(const TaylorHoodSpace& space, const MaterialParams& params,
                             const ResolventData& data);
ResolventSolution solve_resolvent(const TaylorHoodSpace& space, const MaterialParams& params,
                                  const ResolventData& data);

/// Pressure split pi = q0 + c0 with q0 of zero mean.
struct PressureSplit {
  VectorXd q0;
  double c0;
};
PressureSplit decompose_pressure(const TaylorHoodSpace& space, const VectorXd& pi);

/// Variationally consistent fluid traction functional on every velocity DOF:
/// R = (lambda M + K) u + B^T pi - (u*, .). Its value on an extension E g
/// vanishing on Gamma_f is <eps(u) nu - pi nu, g>_{Gamma_s}.
VectorXd fluid_traction(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi,
                        const ResolventData& data);

/// <eps(u) nu - pi nu, g> for an interface trace g (one entry per interface
/// DOF), using the nodal extension of g.
double interface_flux(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi,
                      const ResolventData& data, const VectorXd& trace);
/// Same functional for an explicit fluid extension (zero on Gamma_f).
double interface_flux_extended(const ResolventSolver& solver, const FsiState& state,
                               const VectorXd& pi, const ResolventData& data,
                               const VectorXd& extension);
/// <sigma(w) nu, g>, nu pointing into the solid, for every interface DOF.
VectorXd solid_traction(const ResolventSolver& solver, const FsiState& state,
                        const ResolventData& data);

/// Interface trace of the unit normal (pointing into the solid). At the four
/// corners both side normals are summed so g.nu = 1 along every side.
VectorXd interface_normal_trace(const TaylorHoodSpace& space);

enum class FluxEvaluation {
  Variational, // through the volume residual identity
  Pointwise,   // edge quadrature of eps(u_h) nu and sigma(w_h) nu
};

/// Constant part of the pressure from the interface traction balance,
/// averaged over Gamma_s.
double recover_c0(const ResolventSolver& solver, const FsiState& state, const VectorXd& pi_q0,
                  const ResolventData& data, FluxEvaluation mode = FluxEvaluation::Variational);

struct ConditionCheck {
  std::string name;
  double residual;
  double tolerance;
  bool passed;
};

struct DomainConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_passed() const;
};

inline constexpr double kGammaFTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kDivergenceTolerance = 1e-10;
inline constexpr double kFluxTolerance = 1e-9;

/// Discrete counterparts of the generator domain conditions: u = 0 on
/// Gamma_f, z = u on Gamma_s, discrete divergence orthogonality, and the
/// traction balance on every interface basis trace. Residuals are scaled by
/// max(1, magnitude of the quantity they compare).
DomainConditionReport check_domain_conditions(const ResolventSolver& solver, const FsiState& state,
                                              const VectorXd& pi, const ResolventData& data);

} // namespace fsi
