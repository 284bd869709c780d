#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>

namespace fsi {

/// Lagrange P2 and P1 bases on the reference triangle. Local node order:
/// vertices 0,1,2, then midpoints of edges (0,1), (1,2), (2,0).
template <typename Scalar>
struct ReferenceP2 {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  using Values = Eigen::Matrix<Scalar, 6, 1>;
  using Gradients = Eigen::Matrix<Scalar, 6, 2>; // d/dxi, d/deta per row

  static Values values(const Point& p) {
    const Scalar l1 = p.x(), l2 = p.y(), l0 = Scalar(1) - l1 - l2;
    Values n;
    n << l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l0 * l1, 4 * l1 * l2,
        4 * l2 * l0;
    return n;
  }

  static Gradients gradients(const Point& p) {
    const Scalar l1 = p.x(), l2 = p.y(), l0 = Scalar(1) - l1 - l2;
    Gradients g;
    g << -(4 * l0 - 1), -(4 * l0 - 1),
        4 * l1 - 1, Scalar(0),
        Scalar(0), 4 * l2 - 1,
        4 * (l0 - l1), -4 * l1,
        4 * l2, 4 * l1,
        -4 * l2, 4 * (l0 - l2);
    return g;
  }

  /// Reference coordinates of the six nodes.
  static std::array<Point, 6> nodes() {
    return {Point(0, 0), Point(1, 0), Point(0, 1), Point(Scalar(0.5), 0),
            Point(Scalar(0.5), Scalar(0.5)), Point(0, Scalar(0.5))};
  }
};

template <typename Scalar>
struct ReferenceP1 {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  using Values = Eigen::Matrix<Scalar, 3, 1>;

  static Values values(const Point& p) {
    Values n;
    n << Scalar(1) - p.x() - p.y(), p.x(), p.y();
    return n;
  }
};

/// Affine map from the reference triangle onto a physical one given by the
/// columns of `corners`.
template <typename Scalar>
struct AffineMap {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

  Point origin;
  Matrix2 jacobian;
  Matrix2 inverse_transpose;
  Scalar det;

  explicit AffineMap(const Eigen::Matrix<Scalar, 2, 3>& corners)
      : origin(corners.col(0)) {
    jacobian.col(0) = corners.col(1) - corners.col(0);
    jacobian.col(1) = corners.col(2) - corners.col(0);
    det = jacobian.determinant();
    inverse_transpose = jacobian.inverse().transpose();
  }

  Point operator()(const Point& ref) const { return origin + jacobian * ref; }

  /// Physical gradients (rows) from reference gradients (rows).
  template <typename Derived>
  auto physical_gradients(const Eigen::MatrixBase<Derived>& ref_grads) const {
    return (ref_grads * inverse_transpose.transpose()).eval();
  }
};

} // namespace fsi
