#pragma once

#include "fsi/common.hpp"
#include "fsi/element_kernels.hpp"
#include "fsi/mesh.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>

namespace fsi {

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorXd = Eigen::VectorXd;

struct MaterialParams {
  double lame_lambda = 1.0;
  double lame_mu = 1.0;
  double shift = 1.0; // resolvent parameter, 1/time

  void validate() const;
};

/// One P2 node on the fluid-solid interface, seen from both sides.
struct InterfaceNode {
  Index fluid_node;
  Index solid_node;
};

/// Taylor-Hood P2/P1 on the fluid region plus vector P2 on the solid.
///
/// Vector DOFs are interleaved: DOF 2*node + c holds component c of `node`.
/// Interface DOFs are numbered 2*k + c for the k-th entry of `interface`.
/// The pressure space keeps constants (no mean-value constraint).
struct TaylorHoodSpace {
  std::shared_ptr<const TriMesh> mesh;

  std::vector<Index> fluid_triangles;
  std::vector<Index> solid_triangles;
  /// Per mesh triangle: its six P2 nodes in the numbering of its region.
  std::vector<std::array<Index, 6>> element_nodes;
  /// Per mesh triangle: its three pressure DOFs (-1 on solid triangles).
  std::vector<std::array<Index, 3>> element_pressure;

  std::vector<Vector2> fluid_nodes;
  std::vector<Vector2> solid_nodes;
  std::vector<bool> fluid_node_on_gamma_f;
  std::vector<Index> pressure_vertices; // mesh vertex of each pressure DOF
  std::vector<InterfaceNode> interface;

  Index num_velocity_dofs() const { return 2 * static_cast<Index>(fluid_nodes.size()); }
  Index num_displacement_dofs() const { return 2 * static_cast<Index>(solid_nodes.size()); }
  Index num_pressure_dofs() const { return static_cast<Index>(pressure_vertices.size()); }
  Index num_interface_dofs() const { return 2 * static_cast<Index>(interface.size()); }

  /// Velocity DOFs not on Gamma_f, increasing.
  std::vector<Index> free_velocity_dofs() const;
  /// Velocity DOFs on Gamma_f, increasing.
  std::vector<Index> constrained_velocity_dofs() const;
  /// Velocity / displacement DOF of each interface DOF.
  std::vector<Index> interface_velocity_dofs() const;
  std::vector<Index> interface_displacement_dofs() const;

  Eigen::Matrix<double, 2, 3> corners(Index triangle) const;
  double fluid_area() const;
  double solid_area() const;
  double interface_length() const;
};

TaylorHoodSpace build_space(std::shared_ptr<const TriMesh> mesh);
TaylorHoodSpace build_space(const TriMesh& mesh);

enum class Form { FluidMass, FluidStrain, FluidGradient, Divergence, SolidMass, SolidStiffness };

/// Local matrix of `form` on one mesh triangle: 12x12 for velocity or
/// displacement forms, 3x12 for the divergence form.
Eigen::MatrixXd element_matrix(const TaylorHoodSpace& space, Index triangle,
                               const MaterialParams& params, Form form);

/// Global matrix of a velocity (fluid) or displacement (solid) form over
/// all DOFs of that field, Dirichlet rows included.
SparseMatrix assemble(const TaylorHoodSpace& space, const MaterialParams& params, Form form);

/// b(v, mu) = -(mu, div v): pressure rows x velocity columns.
SparseMatrix assemble_divergence(const TaylorHoodSpace& space);
SparseMatrix assemble_pressure_mass(const TaylorHoodSpace& space);

enum class Field { Velocity, Pressure, Displacement };

using VectorField = std::function<Vector2(const Vector2&)>;
using ScalarField = std::function<double(const Vector2&)>;

/// Nodal interpolant.
VectorXd interpolate(const TaylorHoodSpace& space, const VectorField& f, Field target);
VectorXd interpolate(const TaylorHoodSpace& space, const ScalarField& f);

/// (f, phi_i) for every velocity or displacement basis function, with the
/// high-degree rule.
VectorXd load_vector(const TaylorHoodSpace& space, const VectorField& f, Field target);

/// Value and physical gradient (row c = grad of component c) of a vector P2
/// field at a reference point of one triangle.
struct PointEvaluation {
  Vector2 value;
  Eigen::Matrix2d gradient;
};
PointEvaluation evaluate_vector(const TaylorHoodSpace& space, Index triangle,
                                const VectorXd& coefficients, const Vector2& reference_point);
double evaluate_pressure(const TaylorHoodSpace& space, Index triangle, const VectorXd& pressure,
                         const Vector2& reference_point);

/// Shared quadrature rules.
const QuadratureRule<double>& system_rule();
const QuadratureRule<double>& error_rule();

/// Gather x[idx] / scatter into a full vector.
VectorXd restrict_to(const VectorXd& x, const std::vector<Index>& idx);
SparseMatrix restrict_to(const SparseMatrix& a, const std::vector<Index>& rows,
                         const std::vector<Index>& cols);

} // namespace fsi
