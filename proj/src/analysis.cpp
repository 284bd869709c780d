#include "fsi/analysis.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace fsi {

// ---------------------------------------------------------------------------
// Rational

namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational: overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(__int128 num, __int128 den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) num = -num, den = -den;
  __int128 a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) num /= a, den /= a;
  return Rational(checked(num), checked(den));
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw std::domain_error("Rational: zero denominator");
  if (den_ < 0) num_ = -num_, den_ = -den_;
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) num_ /= g, den_ /= g;
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
              static_cast<__int128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

// ---------------------------------------------------------------------------
// Benchmark polynomial

Polynomial<double> to_double(const Polynomial<Rational>& p) {
  Polynomial<double> d;
  for (const auto& c : p.coefficients) d.coefficients.push_back(c.to_double());
  return d;
}

Polynomial<Rational> benchmark_phi() {
  const Polynomial<Rational> x{{0, 1}};
  const Polynomial<Rational> one_minus_x{{1, -1}};
  const Polynomial<Rational> a{{Rational(-1, 3), 1}};
  const Polynomial<Rational> b{{Rational(2, 3), -1}};
  return x * x * one_minus_x * one_minus_x * a * a * a * b * b * b;
}

PrintedDerivatives PrintedDerivatives::published() {
  using R = Rational;
  PrintedDerivatives p;
  p.first = {-10, 45, R(-256, 3), R(266, 3), R(-494, 9), R(185, 9), R(-3272, 729), R(124, 243), R(-16, 729), 0};
  p.second = {-90, 360, R(-1792, 3), 532, R(-2470, 9), R(740, 9), R(-3272, 243), R(248, 243), R(-16, 729)};
  p.third = {-720, 2520, -3584, 2660, R(-9880, 9), R(740, 3), R(-6544, 243), R(248, 243)};
  return p;
}

CoefficientMismatch::CoefficientMismatch(int order, int power, Rational printed, Rational formal)
    : std::runtime_error("phi" + std::string(order, '\'') + ": coefficient of x^" + std::to_string(power) +
                         " is printed as " + printed.str() + " but the formal derivative gives " + formal.str()),
      order_(order), power_(power) {}

namespace {

Polynomial<Rational> from_descending(const std::vector<Rational>& desc) {
  Polynomial<Rational> p;
  p.coefficients.assign(desc.rbegin(), desc.rend());
  return p;
}

} // namespace

void check_printed_derivatives(const PrintedDerivatives& printed) {
  Polynomial<Rational> formal = benchmark_phi();
  const std::vector<Rational>* lists[] = {&printed.first, &printed.second, &printed.third};
  for (int order = 1; order <= 3; ++order) {
    formal = formal.derivative();
    const auto p = from_descending(*lists[order - 1]);
    const std::size_t n = std::max(p.coefficients.size(), formal.coefficients.size());
    for (std::size_t k = n; k-- > 0;) {
      const Rational a = k < p.coefficients.size() ? p.coefficients[k] : Rational(0);
      const Rational b = k < formal.coefficients.size() ? formal.coefficients[k] : Rational(0);
      if (!(a == b)) throw CoefficientMismatch(order, static_cast<int>(k), a, b);
    }
  }
}

// ---------------------------------------------------------------------------
// Manufactured case

Vector2 ManufacturedCase::velocity(const Vector2& x) const {
  return {phi(x.x()) * d1(x.y()), -d1(x.x()) * phi(x.y())};
}

Eigen::Matrix2d ManufacturedCase::velocity_gradient(const Vector2& x) const {
  const double a = phi(x.x()), a1 = d1(x.x()), a2 = d2(x.x());
  const double b = phi(x.y()), b1 = d1(x.y()), b2 = d2(x.y());
  Eigen::Matrix2d g;
  g << a1 * b1, a * b2, -a2 * b, -a1 * b1;
  return g;
}

Vector2 ManufacturedCase::laplacian(const Vector2& x) const {
  const double a = phi(x.x()), a1 = d1(x.x()), a2 = d2(x.x()), a3 = d3(x.x());
  const double b = phi(x.y()), b1 = d1(x.y()), b2 = d2(x.y()), b3 = d3(x.y());
  return {a2 * b1 + a * b3, -(a3 * b + a1 * b2)};
}

Vector2 ManufacturedCase::data(const Vector2& x) const {
  const double a = phi(x.x()), a1 = printed_d1(x.x()), a2 = printed_d2(x.x()), a3 = printed_d3(x.x());
  const double b = phi(x.y()), b1 = printed_d1(x.y()), b2 = printed_d2(x.y()), b3 = printed_d3(x.y());
  return {lambda * a * b1 - 0.5 * (a2 * b1 + a * b3), -lambda * a1 * b + 0.5 * (a3 * b + a1 * b2)};
}

ManufacturedCase manufactured_case(double lambda) {
  require(lambda > 0, "manufactured_case: lambda must be positive");
  const auto printed = PrintedDerivatives::published();
  check_printed_derivatives(printed);
  const auto phi = benchmark_phi();
  ManufacturedCase c;
  c.lambda = lambda;
  c.phi = to_double(phi);
  c.d1 = to_double(phi.derivative());
  c.d2 = to_double(phi.derivative().derivative());
  c.d3 = to_double(phi.derivative().derivative().derivative());
  c.printed_d1 = to_double(from_descending(printed.first));
  c.printed_d2 = to_double(from_descending(printed.second));
  c.printed_d3 = to_double(from_descending(printed.third));
  return c;
}

namespace {

double radical_inverse(unsigned i, unsigned base) {
  double r = 0, f = 1.0 / base;
  for (; i > 0; i /= base, f /= base) r += f * (i % base);
  return r;
}

bool in_solid_closure(const Vector2& x) {
  return x.x() >= 1.0 / 3 && x.x() <= 2.0 / 3 && x.y() >= 1.0 / 3 && x.y() <= 2.0 / 3;
}

} // namespace

std::vector<Vector2> fluid_sample_points(int n) {
  std::vector<Vector2> pts;
  for (unsigned i = 1; static_cast<int>(pts.size()) < n; ++i) {
    const Vector2 x(radical_inverse(i, 2), radical_inverse(i, 3));
    if (!in_solid_closure(x)) pts.push_back(x);
  }
  return pts;
}

double verify_data_identity(const ManufacturedCase& c) {
  double res = 0, scale = 0;
  for (const auto& x : fluid_sample_points(1000)) {
    const Vector2 d = c.data(x);
    res = std::max(res, (c.lambda * c.velocity(x) - 0.5 * c.laplacian(x) - d).cwiseAbs().maxCoeff());
    scale = std::max(scale, d.cwiseAbs().maxCoeff());
  }
  return scale > 0 ? res / scale : res;
}

ResolventData manufactured_data(const TaylorHoodSpace& space, const ManufacturedCase& c) {
  ResolventData d = ResolventData::zero(space);
  d.fluid_load = load_vector(space, [&](const Vector2& x) { return c.data(x); }, Field::Velocity);
  return d;
}

// ---------------------------------------------------------------------------
// Errors

ErrorNorms error_norms(const TaylorHoodSpace& space, const MaterialParams& params,
                       const FsiState& state, const VectorXd& pi, const ManufacturedCase& c) {
  require(state.u.size() == space.num_velocity_dofs() && state.w.size() == space.num_displacement_dofs() &&
              pi.size() == space.num_pressure_dofs(),
          "error_norms: state does not match the mesh");
  const auto& rule = error_rule();
  double u_l2 = 0, u_grad = 0, u_eps = 0, p_l2 = 0;
  for (Index t : space.fluid_triangles) {
    const AffineMap<double> map(space.corners(t));
    const double jac = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vector2 ref = rule.points[q];
      const Vector2 x = map(ref);
      const auto uh = evaluate_vector(space, t, state.u, ref);
      const Vector2 e = uh.value - c.velocity(x);
      const Eigen::Matrix2d g = uh.gradient - c.velocity_gradient(x);
      const Eigen::Matrix2d eps = 0.5 * (g + g.transpose());
      const double p = evaluate_pressure(space, t, pi, ref);
      const double w = rule.weights[q] * jac;
      u_l2 += w * e.squaredNorm();
      u_grad += w * g.squaredNorm();
      u_eps += w * eps.squaredNorm();
      p_l2 += w * p * p;
    }
  }
  double w_l2 = 0, w_grad = 0, w_sig = 0;
  for (Index t : space.solid_triangles) {
    const AffineMap<double> map(space.corners(t));
    const double jac = std::abs(map.det);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto wh = evaluate_vector(space, t, state.w, rule.points[q]);
      const Eigen::Matrix2d eps = 0.5 * (wh.gradient + wh.gradient.transpose());
      const double w = rule.weights[q] * jac;
      w_l2 += w * wh.value.squaredNorm();
      w_grad += w * wh.gradient.squaredNorm();
      w_sig += w * (params.lame_lambda * eps.trace() * eps.trace() + 2 * params.lame_mu * eps.squaredNorm());
    }
  }
  ErrorNorms n;
  n.u_h1 = std::sqrt(u_l2 + u_grad);
  n.u_strain = std::sqrt(u_eps);
  n.pi_l2 = std::sqrt(p_l2);
  n.w_energy = std::sqrt(w_sig + w_l2);
  n.w_h1 = std::sqrt(w_l2 + w_grad);
  return n;
}

// ---------------------------------------------------------------------------
// Convergence

std::optional<double> convergence_rate(double coarse, double fine) {
  if (!(coarse > kRateFloor) || !(fine > kRateFloor)) return std::nullopt;
  return std::log(coarse / fine) / std::log(2.0);
}

std::vector<RateRow> compute_rates(const std::vector<ConvergenceRow>& rows) {
  std::vector<RateRow> out;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = rows[i + 1];
    RateRow r{a.level, b.level, {}, {}, {}, {}};
    if (a.failure.empty() && b.failure.empty()) {
      r.u_h1 = convergence_rate(a.errors.u_h1, b.errors.u_h1);
      r.pi_l2 = convergence_rate(a.errors.pi_l2, b.errors.pi_l2);
      r.w_h1 = convergence_rate(a.errors.w_h1, b.errors.w_h1);
      r.u_strain = convergence_rate(a.errors.u_strain, b.errors.u_strain);
    }
    out.push_back(r);
  }
  return out;
}

ConvergenceReport convergence_study(const std::vector<int>& levels, const MaterialParams& params,
                                    bool use_interpolant) {
  require(std::is_sorted(levels.begin(), levels.end()) &&
              std::adjacent_find(levels.begin(), levels.end()) == levels.end(),
          "convergence_study: levels must be strictly ascending");
  const auto c = manufactured_case(params.shift);
  ConvergenceReport report;
  for (int level : levels) {
    ConvergenceRow row;
    row.level = level;
    try {
      const auto mesh = std::make_shared<const TriMesh>(generate_mesh(level));
      row.elements = mesh->num_triangles();
      row.hypotenuse = mesh->hypotenuse;
      const auto space = build_space(mesh);
      FsiState state;
      VectorXd pi;
      if (use_interpolant) {
        state = FsiState::zero(space);
        state.u = interpolate(space, [&](const Vector2& x) { return c.velocity(x); }, Field::Velocity);
        pi = VectorXd::Zero(space.num_pressure_dofs());
      } else {
        auto sol = solve_resolvent(space, params, manufactured_data(space, c));
        pi = *sol.state.pi;
        state = std::move(sol.state);
      }
      row.errors = error_norms(space, params, state, pi, c);
    } catch (const std::exception& e) {
      row.failure = e.what();
    }
    report.rows.push_back(row);
  }
  report.rates = compute_rates(report.rows);
  return report;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::string rate_str(const std::optional<double>& r) {
  if (!r) return "—";
  std::ostringstream s;
  s << std::setprecision(17) << *r;
  return s.str();
}

} // namespace

void write_convergence_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "level,elements,hypotenuse,u_h1,pi_l2,w_h1,u_strain,w_energy\n";
  for (const auto& r : report.rows) {
    if (!r.failure.empty()) {
      out << r.level << "," << r.elements << "," << r.hypotenuse << ",failed,failed,failed,failed,failed\n";
      continue;
    }
    out << r.level << "," << r.elements << "," << r.hypotenuse << "," << r.errors.u_h1 << "," << r.errors.pi_l2
        << "," << r.errors.w_h1 << "," << r.errors.u_strain << "," << r.errors.w_energy << "\n";
  }
}

void write_rates_csv(const ConvergenceReport& report, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "pair,u_h1,pi_l2,w_h1,u_strain\n";
  for (const auto& r : report.rates)
    out << "Mesh " << r.from + 1 << " / Mesh " << r.to + 1 << "," << rate_str(r.u_h1) << "," << rate_str(r.pi_l2)
        << "," << rate_str(r.w_h1) << "," << rate_str(r.u_strain) << "\n";
}

std::vector<ConvergenceRow> read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<ConvergenceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream s(line);
    for (std::string cell; std::getline(s, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    ConvergenceRow r;
    r.level = std::stoi(f[0]);
    r.elements = std::stoll(f[1]);
    r.hypotenuse = std::stod(f[2]);
    if (f[3] == "failed") {
      r.failure = "failed";
    } else {
      r.errors = {std::stod(f[3]), std::stod(f[6]), std::stod(f[4]), std::stod(f[7]), std::stod(f[5])};
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Inf-sup

namespace {

struct PressureSchur {
  SparseMatrix k, b, mp;
  std::shared_ptr<SparseLu> lu;
  Index nv = 0;

  explicit PressureSchur(const TaylorHoodSpace& space) {
    const MaterialParams params;
    const auto free = space.free_velocity_dofs();
    std::vector<Index> all(space.num_pressure_dofs());
    std::iota(all.begin(), all.end(), Index{0});
    k = restrict_to(assemble(space, params, Form::FluidStrain), free, free);
    b = restrict_to(assemble_divergence(space), all, free);
    mp = assemble_pressure_mass(space);
    SaddleSystem s;
    s.a_lambda = k;
    s.b = b;
    lu = std::make_shared<SparseLu>(s.matrix());
    nv = k.rows();
  }

  // q = (B K^-1 B^T)^-1 r through [K B^T; B 0][v; q] = [0; -r].
  VectorXd apply_inverse(const VectorXd& r) const {
    VectorXd rhs = VectorXd::Zero(nv + r.size());
    rhs.tail(r.size()) = -r;
    return lu->solve(rhs).tail(r.size());
  }
};

} // namespace

EigenPair infsup_eigenpair(const TaylorHoodSpace& space) {
  const PressureSchur s(space);
  return smallest_gen_eig([&](const VectorXd& r) { return s.apply_inverse(r); }, s.mp);
}

double constant_mode_beta(const TaylorHoodSpace& space) {
  const PressureSchur s(space);
  const VectorXd one = VectorXd::Ones(space.num_pressure_dofs());
  const VectorXd b1 = s.b.transpose() * one;
  // v = K^-1 B^T 1 through the velocity block alone.
  const VectorXd v = SparseLu(s.k).solve(b1);
  return std::sqrt(b1.dot(v) / one.dot(s.mp * one));
}

double InfSupReport::spread() const {
  if (rows.empty()) return 0;
  double lo = rows.front().beta, hi = lo;
  for (const auto& r : rows) lo = std::min(lo, r.beta), hi = std::max(hi, r.beta);
  return (hi - lo) / hi;
}

InfSupReport infsup_study(const std::vector<int>& levels) {
  require(std::is_sorted(levels.begin(), levels.end()), "infsup_study: levels must be ascending");
  InfSupReport report;
  for (int level : levels) {
    require(level >= 0, "infsup_study: negative level");
    const auto mesh = generate_mesh(level);
    try {
      const auto pair = infsup_eigenpair(build_space(mesh));
      report.rows.push_back({level, mesh.hypotenuse, std::sqrt(std::max(0.0, pair.value)), pair.iterations});
    } catch (const EigenIterationError& e) {
      throw EigenIterationError("level " + std::to_string(level) + ": " + e.what(), e.last_iterate());
    }
  }
  return report;
}

void write_infsup_csv(const InfSupReport& report, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "level,h,beta_h\n";
  for (const auto& r : report.rows) out << r.level << "," << r.hypotenuse << "," << r.beta << "\n";
}

// ---------------------------------------------------------------------------
// Kernel coercivity

bool KernelCoercivityReport::passed() const {
  return samples > 0 && alpha > 0 && min_a_over_strain >= 1.0 && min_strain_over_h1 >= alpha * (1 - 1e-8);
}

KernelCoercivityReport kernel_coercivity(const ResolventSolver& solver, int samples, unsigned seed) {
  const auto& space = solver.space();
  const auto& sys = solver.system();
  const auto free = sys.free_velocity_dofs;
  const SparseMatrix m = restrict_to(solver.fluid_mass(), free, free);
  const SparseMatrix k = restrict_to(solver.fluid_strain(), free, free);
  const SparseMatrix g = m + restrict_to(assemble(space, solver.params(), Form::FluidGradient), free, free);

  KernelCoercivityReport r;
  r.samples = samples;
  r.alpha = smallest_gen_eig(k, g).value;
  r.min_a_over_strain = r.min_strain_over_h1 = std::numeric_limits<double>::infinity();

  // M-orthogonal projection onto ker B: [M B^T; B 0][v; q] = [M x; 0].
  SaddleSystem proj;
  proj.a_lambda = m;
  proj.b = sys.b;
  const SparseLu lu(proj.matrix());
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  for (int s = 0; s < samples; ++s) {
    VectorXd x(free.size());
    for (Index i = 0; i < x.size(); ++i) x(i) = n(rng);
    VectorXd rhs = VectorXd::Zero(lu.rows());
    rhs.head(x.size()) = m * x;
    const VectorXd v = lu.solve(rhs).head(x.size());
    const double strain = v.dot(k * v);
    const double a = v.dot(sys.a_lambda * v);
    r.min_a_over_strain = std::min(r.min_a_over_strain, a / strain);
    r.min_strain_over_h1 = std::min(r.min_strain_over_h1, strain / v.dot(g * v));
    r.max_divergence = std::max(r.max_divergence, (sys.b * v).cwiseAbs().maxCoeff());
  }
  return r;
}

} // namespace fsi
