#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fsi {

/// Quadrature on the reference triangle (0,0),(1,0),(0,1). Weights sum to
/// the reference area 1/2.
template <typename Scalar>
struct QuadratureRule {
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  int degree = 0;
  std::vector<Point> points;
  std::vector<Scalar> weights;

  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1], by Newton iteration on P_n.
template <typename Scalar>
void gauss_legendre_unit(int n, std::vector<Scalar>& nodes, std::vector<Scalar>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_unit: n must be positive");
  nodes.assign(n, Scalar(0));
  weights.assign(n, Scalar(0));
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const Scalar pn = (n == 1) ? x : p1;
      const Scalar pnm1 = (n == 1) ? Scalar(1) : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1);
      const Scalar dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-18)) break;
    }
    // Recompute the derivative at the converged node.
    Scalar p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? Scalar(1) : n * (x * p1 - p0) / (x * x - 1);
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    nodes[i] = (1 - x) / 2;
    nodes[n - 1 - i] = (1 + x) / 2;
    weights[i] = weights[n - 1 - i] = w / 2;
  }
}

/// Conical-product rule exact for total degree `degree` on the reference
/// triangle. Collapses the unit square with x = s, y = t(1-s); the Jacobian
/// (1-s) raises the degree in s by one, so n points per direction with
/// 2n-1 >= degree+1 suffice.
template <typename Scalar>
QuadratureRule<Scalar> triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  const int n = degree / 2 + 1;
  std::vector<Scalar> x, w;
  gauss_legendre_unit<Scalar>(n, x, w);

  QuadratureRule<Scalar> rule;
  rule.degree = degree;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Scalar s = x[a], t = x[b];
      rule.points.emplace_back(s, t * (1 - s));
      rule.weights.push_back(w[a] * w[b] * (1 - s));
    }
  return rule;
}

/// Degree used for every system matrix (largest integrand is degree 4).
inline constexpr int kSystemQuadratureDegree = 6;
/// Degree used for error norms and loads built from closed-form data.
inline constexpr int kErrorQuadratureDegree = 12;

} // namespace fsi
