#pragma once

// Dense reference computations for coarse meshes. Each one takes a route
// independent of the sparse production path.

#include "fsi/solver.hpp"

#include <Eigen/Dense>

namespace fsi::oracle {

/// Monolithic coupled solve with unknowns (u on free DOFs, pi, w on solid
/// interior DOFs). The interface displacement is tied to the velocity by
/// w|Gs = (1/lambda)(u + w*)|Gs and the test functions share their trace.
FsiState monolithic_solve(const TaylorHoodSpace& space, const MaterialParams& params,
                          const ResolventData& data);

/// Extension of one interface DOF into the solid by a dense interior solve.
VectorXd dirichlet_column(const TaylorHoodSpace& space, const MaterialParams& params, Index interface_dof);

/// Zero-trace solution of the shifted solid problem with load M*source.
VectorXd solid_resolvent_inverse(const TaylorHoodSpace& space, const MaterialParams& params,
                                 const VectorXd& source);

/// Smallest eigenvalue of B K^-1 B^T q = beta^2 M_p q, all dense.
double infsup_beta_squared(const TaylorHoodSpace& space);

/// Dense Gram matrix of the energy inner product on (u, w, z).
Eigen::MatrixXd energy_gram(const TaylorHoodSpace& space, const MaterialParams& params);

/// Smallest eigenvalue of a dense symmetric-definite pencil.
double smallest_eigenvalue(const Eigen::MatrixXd& s, const Eigen::MatrixXd& m);

} // namespace fsi::oracle
