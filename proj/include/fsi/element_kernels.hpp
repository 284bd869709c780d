#pragma once

#include "fsi/quadrature.hpp"
#include "fsi/reference_element.hpp"

namespace fsi {

/// Local matrices for vector P2 fields, DOFs interleaved as 2*node+component.
/// Every integrand is polynomial on an affine element, so a rule of degree
/// >= 4 integrates all of them exactly.
template <typename Scalar>
struct P2VectorKernels {
  using Corners = Eigen::Matrix<Scalar, 2, 3>;
  using Local = Eigen::Matrix<Scalar, 12, 12>;
  using LocalDivergence = Eigen::Matrix<Scalar, 3, 12>;

  static Local mass(const Corners& corners, const QuadratureRule<Scalar>& rule) {
    const AffineMap<Scalar> map(corners);
    Local m = Local::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto n = ReferenceP2<Scalar>::values(rule.points[q]);
      const Scalar w = rule.weights[q] * std::abs(map.det);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          for (int c = 0; c < 2; ++c) m(2 * a + c, 2 * b + c) += w * n(a) * n(b);
    }
    return m;
  }

  /// (eps(v), eps(v~)) scaled by `shear`, plus `bulk` (div v, div v~).
  /// Fluid strain form: shear = 1, bulk = 0. Elastic stiffness
  /// (sigma(v), eps(v~)): shear = 2*mu, bulk = lambda.
  static Local strain(const Corners& corners, const QuadratureRule<Scalar>& rule, Scalar shear,
                      Scalar bulk) {
    const AffineMap<Scalar> map(corners);
    Local k = Local::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto g = map.physical_gradients(ReferenceP2<Scalar>::gradients(rule.points[q]));
      const Scalar w = rule.weights[q] * std::abs(map.det);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const Scalar dot = g(a, 0) * g(b, 0) + g(a, 1) * g(b, 1);
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) {
              // eps(N_a e_c) : eps(N_b e_d) = (delta_cd g_a.g_b + g_a[d] g_b[c]) / 2
              const Scalar eps = Scalar(0.5) * ((c == d ? dot : Scalar(0)) + g(a, d) * g(b, c));
              k(2 * a + c, 2 * b + d) += w * (shear * eps + bulk * g(a, c) * g(b, d));
            }
        }
    }
    return k;
  }

  /// (grad v, grad v~), used for the full H^1 Gram matrix.
  static Local gradient(const Corners& corners, const QuadratureRule<Scalar>& rule) {
    const AffineMap<Scalar> map(corners);
    Local k = Local::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto g = map.physical_gradients(ReferenceP2<Scalar>::gradients(rule.points[q]));
      const Scalar w = rule.weights[q] * std::abs(map.det);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const Scalar dot = g(a, 0) * g(b, 0) + g(a, 1) * g(b, 1);
          for (int c = 0; c < 2; ++c) k(2 * a + c, 2 * b + c) += w * dot;
        }
    }
    return k;
  }

  /// b(v, mu) = -(mu, div v); rows are the P1 pressure basis.
  static LocalDivergence divergence(const Corners& corners, const QuadratureRule<Scalar>& rule) {
    const AffineMap<Scalar> map(corners);
    LocalDivergence b = LocalDivergence::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto g = map.physical_gradients(ReferenceP2<Scalar>::gradients(rule.points[q]));
      const auto p = ReferenceP1<Scalar>::values(rule.points[q]);
      const Scalar w = rule.weights[q] * std::abs(map.det);
      for (int r = 0; r < 3; ++r)
        for (int a = 0; a < 6; ++a)
          for (int c = 0; c < 2; ++c) b(r, 2 * a + c) -= w * p(r) * g(a, c);
    }
    return b;
  }

  static Eigen::Matrix<Scalar, 3, 3> p1_mass(const Corners& corners,
                                             const QuadratureRule<Scalar>& rule) {
    const AffineMap<Scalar> map(corners);
    Eigen::Matrix<Scalar, 3, 3> m = Eigen::Matrix<Scalar, 3, 3>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto p = ReferenceP1<Scalar>::values(rule.points[q]);
      m += rule.weights[q] * std::abs(map.det) * p * p.transpose();
    }
    return m;
  }
};

} // namespace fsi
