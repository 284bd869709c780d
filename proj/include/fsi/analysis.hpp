#pragma once

#include "fsi/solver.hpp"
#include "fsi/sparse.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fsi {

/// Exact fraction with a positive denominator, always in lowest terms.
class Rational {
public:
  Rational(std::int64_t num = 0, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return {-num_, den_}; }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  friend bool operator==(const Rational&, const Rational&) = default;

private:
  std::int64_t num_, den_;
};

/// Polynomial in one variable, coefficients in ascending powers.
template <typename Scalar>
struct Polynomial {
  std::vector<Scalar> coefficients;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }

  template <typename T>
  T operator()(const T& x) const {
    T r = T(0);
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) r = r * x + T(*it);
    return r;
  }

  Polynomial derivative() const {
    Polynomial d;
    for (std::size_t k = 1; k < coefficients.size(); ++k)
      d.coefficients.push_back(coefficients[k] * Scalar(static_cast<std::int64_t>(k)));
    if (d.coefficients.empty()) d.coefficients.push_back(Scalar(0));
    return d;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial p;
    p.coefficients.assign(a.coefficients.size() + b.coefficients.size() - 1, Scalar(0));
    for (std::size_t i = 0; i < a.coefficients.size(); ++i)
      for (std::size_t j = 0; j < b.coefficients.size(); ++j) p.coefficients[i + j] += a.coefficients[i] * b.coefficients[j];
    return p;
  }
};

Polynomial<double> to_double(const Polynomial<Rational>& p);

/// phi(x) = x^2 (1-x)^2 (x-1/3)^3 (2/3-x)^3 expanded exactly.
Polynomial<Rational> benchmark_phi();

/// The published coefficient lists of phi', phi'', phi''', highest power
/// first, down to the constant term.
struct PrintedDerivatives {
  std::vector<Rational> first, second, third;
  static PrintedDerivatives published();
};

/// Thrown when a printed derivative list disagrees with the formal derivative.
class CoefficientMismatch : public std::runtime_error {
public:
  CoefficientMismatch(int order, int power, Rational printed, Rational formal);
  int order() const { return order_; }
  int power() const { return power_; }

private:
  int order_, power_;
};

/// Compares printed lists against formal derivatives of benchmark_phi().
/// Throws CoefficientMismatch naming the first bad coefficient.
void check_printed_derivatives(const PrintedDerivatives& printed);

/// Stream-function solution u = (A B', -A' B), A = B = phi, with w = z = pi = 0.
///
/// `phi` and its formal derivatives define the exact fields; the printed
/// derivative lists define the data u*, so a typo in them shows up as a
/// residual in verify_data_identity.
struct ManufacturedCase {
  double lambda = 1.0;
  Polynomial<double> phi, d1, d2, d3;                 // formal
  Polynomial<double> printed_d1, printed_d2, printed_d3; // published

  Vector2 velocity(const Vector2& x) const;
  Eigen::Matrix2d velocity_gradient(const Vector2& x) const; // row c = grad u_c
  Vector2 laplacian(const Vector2& x) const;
  Vector2 data(const Vector2& x) const;
};

ManufacturedCase manufactured_case(double lambda);

/// Max over 1000 Halton points in the fluid region of
/// |lambda u - (1/2) Lap u - u*|, relative to max |u*| over the same points.
double verify_data_identity(const ManufacturedCase& c);

/// First n points of the base (2,3) Halton sequence lying in the fluid region.
std::vector<Vector2> fluid_sample_points(int n);

/// Data Y* = (u*, 0, 0) of the manufactured case on a space.
ResolventData manufactured_data(const TaylorHoodSpace& space, const ManufacturedCase& c);

struct ErrorNorms {
  double u_h1 = 0;     // full H1 norm over the fluid
  double u_strain = 0; // ||eps(u_h - u)||
  double pi_l2 = 0;
  double w_energy = 0; // sqrt((sigma(e), eps(e)) + ||e||^2)
  double w_h1 = 0;     // full H1 norm over the solid
};

ErrorNorms error_norms(const TaylorHoodSpace& space, const MaterialParams& params,
                       const FsiState& state, const VectorXd& pi, const ManufacturedCase& c);

struct ConvergenceRow {
  int level = 0;
  Index elements = 0;
  double hypotenuse = 0;
  ErrorNorms errors;
  std::string failure; // empty when the level ran
};

struct RateRow {
  int from = 0, to = 0;
  std::optional<double> u_h1, pi_l2, w_h1, u_strain;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<RateRow> rates;
};

inline constexpr double kRateFloor = 1e-15;

/// log2(coarse/fine), or nothing when either error is at or below the floor.
std::optional<double> convergence_rate(double coarse, double fine);
std::vector<RateRow> compute_rates(const std::vector<ConvergenceRow>& rows);

/// With `use_interpolant` the solve is replaced by the nodal interpolant of
/// the exact solution.
ConvergenceReport convergence_study(const std::vector<int>& levels, const MaterialParams& params,
                                    bool use_interpolant = false);

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path);
void write_rates_csv(const ConvergenceReport& report, const std::filesystem::path& path);
std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path);

struct InfSupRow {
  int level = 0;
  double hypotenuse = 0;
  double beta = 0;
  int iterations = 0;
};

struct InfSupReport {
  std::vector<InfSupRow> rows;
  std::string velocity_norm = "strain"; // |v|_1 = ||eps(v)||
  double spread() const;                // (max - min) / max
};

/// Smallest eigenpair of B K^-1 B^T q = beta^2 M_p q with K the strain form
/// on free velocity DOFs.
EigenPair infsup_eigenpair(const TaylorHoodSpace& space);
/// beta restricted to the constant pressure.
double constant_mode_beta(const TaylorHoodSpace& space);
InfSupReport infsup_study(const std::vector<int>& levels);
void write_infsup_csv(const InfSupReport& report, const std::filesystem::path& path);

struct KernelCoercivityReport {
  int samples = 0;
  double alpha = 0;            // min ||eps(v)||^2 / ||v||_1^2 over free velocities
  double min_a_over_strain = 0; // min a_lambda(v,v) / ||eps(v)||^2 over samples
  double min_strain_over_h1 = 0;
  double max_divergence = 0;   // max |B v| over samples
  bool passed() const;
};

/// Random velocities projected onto ker B.
KernelCoercivityReport kernel_coercivity(const ResolventSolver& solver, int samples, unsigned seed);

} // namespace fsi
