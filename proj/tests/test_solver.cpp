#include "fsi/analysis.hpp"
#include "fsi/oracle.hpp"
#include "fsi/solver.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fsi;

namespace {

const TaylorHoodSpace& level(int k) {
  static std::map<int, TaylorHoodSpace> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_space(generate_mesh(k))).first;
  return it->second;
}

VectorXd normal_vector(Index n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

ResolventData make_random_data(const TaylorHoodSpace& space, std::mt19937& rng) {
  return {normal_vector(space.num_velocity_dofs(), rng), normal_vector(space.num_displacement_dofs(), rng),
          normal_vector(space.num_displacement_dofs(), rng)};
}

double rel(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

double solid_energy(const DirichletMap& m, const VectorXd& w) { return w.dot(m.solid_operator * w); }

} // namespace

// ---------------------------------------------------------------------------
// Dirichlet map

TEST(DirichletMap, ZeroTraceGivesZeroExtension) {
  const auto map = dirichlet_map(level(0), MaterialParams{});
  EXPECT_EQ(map.extend(VectorXd::Zero(level(0).num_interface_dofs())).norm(), 0.0);
}

TEST(DirichletMap, ColumnsHaveUnitTraces) {
  const auto map = dirichlet_map(level(0), MaterialParams{});
  for (Index i = 0; i < map.extension.cols(); ++i) {
    const VectorXd t = map.trace(map.extension.col(i));
    for (Index j = 0; j < t.size(); ++j) EXPECT_EQ(t(j), i == j ? 1.0 : 0.0);
  }
}

TEST(DirichletMap, InteriorResidualIsSmall) {
  const auto map = dirichlet_map(level(1), MaterialParams{0.5, 2.0, 1.7});
  const VectorXd zero = VectorXd::Zero(map.solid_mass.rows());
  for (Index i = 0; i < map.extension.cols(); ++i)
    EXPECT_LE(map.interior_residual(map.extension.col(i), zero).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DirichletMap, MatchesDenseOracle) {
  const MaterialParams p;
  const auto map = dirichlet_map(level(0), p);
  for (Index i : {Index{0}, Index{7}, Index{31}}) {
    const VectorXd ref = oracle::dirichlet_column(level(0), p, i);
    EXPECT_LE((map.extension.col(i) - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(DirichletMap, ExtensionMinimizesEnergy) {
  const auto map = dirichlet_map(level(0), MaterialParams{});
  std::mt19937 rng(17);
  const VectorXd trace = normal_vector(map.extension.cols(), rng);
  const VectorXd e = map.extend(trace);
  const double base = solid_energy(map, e);
  for (int k = 0; k < 20; ++k) {
    VectorXd perturbed = e;
    for (Index d : map.interior_dofs) perturbed(d) += 0.01 * normal_vector(1, rng)(0);
    EXPECT_GT(solid_energy(map, perturbed), base);
  }
}

// ---------------------------------------------------------------------------
// Solid resolvent

TEST(SolidResolvent, ZeroSourceGivesZero) {
  const MaterialParams p;
  EXPECT_EQ(solid_resolvent_inverse(level(0), p, VectorXd::Zero(level(0).num_displacement_dofs())).norm(), 0.0);
}

TEST(SolidResolvent, MatchesDenseOracleWithZeroTrace) {
  const MaterialParams p{2.0, 0.5, 1.3};
  std::mt19937 rng(19);
  const VectorXd f = normal_vector(level(0).num_displacement_dofs(), rng);
  const VectorXd w = solid_resolvent_inverse(level(0), p, f);
  EXPECT_LE(rel(w, oracle::solid_resolvent_inverse(level(0), p, f)), 1e-10);
  for (Index d : level(0).interface_displacement_dofs()) EXPECT_EQ(w(d), 0.0);
}

TEST(SolidResolvent, OperatorBoundedBelowByShiftedMass) {
  const MaterialParams p{1.0, 1.0, 0.8};
  const auto map = dirichlet_map(level(0), p);
  std::mt19937 rng(23);
  for (int k = 0; k < 20; ++k) {
    const VectorXd w = normal_vector(map.solid_mass.rows(), rng);
    EXPECT_GE(w.dot(map.solid_operator * w), (p.shift * p.shift + 1) * w.dot(map.solid_mass * w) * (1 - 1e-14));
  }
}

// ---------------------------------------------------------------------------
// Saddle system

TEST(SaddleSystem, ZeroDataGivesZeroRhs) {
  const auto sys = assemble_system(level(0), MaterialParams{}, ResolventData::zero(level(0)));
  EXPECT_EQ(sys.rhs().norm(), 0.0);
}

TEST(SaddleSystem, InterfaceBlockIsSymmetric) {
  const ResolventSolver solver(level(0), MaterialParams{0.3, 1.7, 2.0});
  const auto& s = solver.system();
  EXPECT_LE((s.interface_block - s.interface_block.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((Eigen::MatrixXd(s.a_lambda) - Eigen::MatrixXd(s.a_lambda).transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SaddleSystem, InterfaceBlockMatchesFormula) {
  const MaterialParams p{0.3, 1.7, 2.0};
  const ResolventSolver solver(level(0), p);
  const auto& map = solver.dirichlet();
  const Eigen::MatrixXd e = map.extension;
  const Eigen::MatrixXd expected =
      (e.transpose() * (map.solid_stiffness * e)) / p.shift +
      ((p.shift * p.shift + 1) / p.shift) * (e.transpose() * (map.solid_mass * e));
  EXPECT_LE((solver.system().interface_block - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SaddleSystem, ALambdaDominatesStrain) {
  const ResolventSolver solver(level(0), MaterialParams{});
  std::mt19937 rng(29);
  const auto free = level(0).free_velocity_dofs();
  for (int k = 0; k < 100; ++k) {
    VectorXd v = VectorXd::Zero(level(0).num_velocity_dofs());
    for (Index d : free) v(d) = normal_vector(1, rng)(0);
    EXPECT_GE(solver.a_lambda(v), v.dot(solver.fluid_strain() * v));
  }
}

TEST(SaddleSystem, MismatchedDataIsAContractViolation) {
  ResolventData bad = ResolventData::zero(level(0));
  bad.w_star.resize(3);
  EXPECT_THROW(assemble_system(level(0), MaterialParams{}, bad), ContractViolation);
  EXPECT_THROW(solve_resolvent(level(0), MaterialParams{}, bad), ContractViolation);
}

TEST(SaddleSystem, GammaFRowsEliminated) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const auto& s = solver.system();
  EXPECT_EQ(s.a_lambda.rows(), static_cast<Index>(level(0).free_velocity_dofs().size()));
  EXPECT_EQ(s.b.cols(), s.a_lambda.rows());
  EXPECT_EQ(s.b.rows(), level(0).num_pressure_dofs());
}

// ---------------------------------------------------------------------------
// Resolvent solve

TEST(Resolvent, ZeroDataGivesZeroState) {
  const auto sol = solve_resolvent(level(0), MaterialParams{}, ResolventData::zero(level(0)));
  EXPECT_EQ(sol.state.u.norm(), 0.0);
  EXPECT_EQ(sol.state.w.norm(), 0.0);
  EXPECT_EQ(sol.state.z.norm(), 0.0);
  EXPECT_EQ(sol.state.pi->norm(), 0.0);
}

TEST(Resolvent, MatchesMonolithicOracle) {
  std::mt19937 rng(3);
  for (const MaterialParams p : {MaterialParams{}, MaterialParams{0.5, 2.0, 0.3}, MaterialParams{3.0, 0.7, 4.0}}) {
    const auto data = make_random_data(level(0), rng);
    const auto sol = solve_resolvent(level(0), p, data);
    const auto ref = oracle::monolithic_solve(level(0), p, data);
    EXPECT_LT(rel(sol.state.u, ref.u), 1e-10);
    EXPECT_LT(rel(*sol.state.pi, *ref.pi), 1e-10);
    EXPECT_LT(rel(sol.state.w, ref.w), 1e-10);
    EXPECT_LT(rel(sol.state.z, ref.z), 1e-10);
  }
}

TEST(Resolvent, ManufacturedErrorAtLevelZeroIsOfOrder1e8) {
  const auto c = manufactured_case(1.0);
  const MaterialParams p;
  const auto sol = solve_resolvent(level(0), p, manufactured_data(level(0), c));
  const auto e = error_norms(level(0), p, sol.state, *sol.state.pi, c);
  EXPECT_GT(e.u_h1, 5.855e-8 / 10);
  EXPECT_LT(e.u_h1, 5.855e-8 * 10);
}

TEST(Resolvent, StateInvariants) {
  std::mt19937 rng(31);
  const auto data = make_random_data(level(1), rng);
  const MaterialParams p{1.0, 1.0, 2.5};
  const auto sol = solve_resolvent(level(1), p, data);
  for (Index d : level(1).constrained_velocity_dofs()) EXPECT_EQ(sol.state.u(d), 0.0);
  const VectorXd u = restrict_to(sol.state.u, level(1).interface_velocity_dofs());
  const VectorXd z = restrict_to(sol.state.z, level(1).interface_displacement_dofs());
  EXPECT_LE((u - z).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff()));
  EXPECT_LE(rel(sol.state.z, p.shift * sol.state.w - data.w_star), 1e-15);
}

TEST(Resolvent, BitwiseDeterministic) {
  std::mt19937 rng(37);
  const auto data = make_random_data(level(1), rng);
  const auto a = solve_resolvent(level(1), MaterialParams{}, data);
  const auto b = solve_resolvent(level(1), MaterialParams{}, data);
  EXPECT_EQ(a.state.u, b.state.u);
  EXPECT_EQ(a.state.w, b.state.w);
  EXPECT_EQ(*a.state.pi, *b.state.pi);
}

TEST(Resolvent, ReportsResidual) {
  std::mt19937 rng(41);
  const auto sol = solve_resolvent(level(0), MaterialParams{}, make_random_data(level(0), rng));
  EXPECT_LE(sol.report.relative_residual, 1e-10);
}

// ---------------------------------------------------------------------------
// Pressure decomposition

TEST(DecomposePressure, ConstantPressure) {
  const auto split = decompose_pressure(level(0), VectorXd::Constant(level(0).num_pressure_dofs(), 5.0));
  EXPECT_NEAR(split.c0, 5.0, 1e-14);
  EXPECT_LE(split.q0.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DecomposePressure, Idempotent) {
  std::mt19937 rng(43);
  const auto first = decompose_pressure(level(0), normal_vector(level(0).num_pressure_dofs(), rng));
  const auto second = decompose_pressure(level(0), first.q0);
  EXPECT_NEAR(second.c0, 0.0, 1e-15);
  const VectorXd ones = VectorXd::Ones(level(0).num_pressure_dofs());
  EXPECT_NEAR(ones.dot(assemble_pressure_mass(level(0)) * first.q0), 0.0, 1e-12);
}

TEST(DecomposePressure, ManufacturedConstantDecreasesUnderRefinement) {
  const auto c = manufactured_case(1.0);
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 2; ++k) {
    const auto sol = solve_resolvent(level(k), MaterialParams{}, manufactured_data(level(k), c));
    const auto split = decompose_pressure(level(k), *sol.state.pi);
    const double pi_l2 = std::sqrt(sol.state.pi->dot(assemble_pressure_mass(level(k)) * *sol.state.pi));
    EXPECT_LE(std::abs(split.c0), pi_l2);
    EXPECT_LT(std::abs(split.c0), previous);
    previous = std::abs(split.c0);
  }
}

// ---------------------------------------------------------------------------
// Interface flux and c0 recovery

TEST(InterfaceFlux, ZeroStateZeroData) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const auto s = FsiState::zero(level(0));
  std::mt19937 rng(47);
  EXPECT_EQ(interface_flux(solver, s, VectorXd::Zero(level(0).num_pressure_dofs()), ResolventData::zero(level(0)),
                           normal_vector(level(0).num_interface_dofs(), rng)),
            0.0);
}

TEST(InterfaceFlux, IndependentOfExtension) {
  const ResolventSolver solver(level(1), MaterialParams{});
  std::mt19937 rng(53);
  const auto data = make_random_data(level(1), rng);
  const auto sol = solver.solve(data);
  const VectorXd g = normal_vector(level(1).num_interface_dofs(), rng);
  VectorXd ext = VectorXd::Zero(level(1).num_velocity_dofs());
  const auto ifv = level(1).interface_velocity_dofs();
  for (std::size_t i = 0; i < ifv.size(); ++i) ext(ifv[i]) = g(static_cast<Index>(i));
  VectorXd other = ext;
  std::vector<char> on_interface(ext.size(), 0);
  for (Index d : ifv) on_interface[d] = 1;
  for (Index d : level(1).free_velocity_dofs())
    if (!on_interface[d]) other(d) = normal_vector(1, rng)(0);
  const double a = interface_flux_extended(solver, sol.state, *sol.state.pi, data, ext);
  const double b = interface_flux_extended(solver, sol.state, *sol.state.pi, data, other);
  EXPECT_LE(std::abs(a - b), 1e-9 * std::max(1.0, std::abs(a)));
  EXPECT_LE(std::abs(a - interface_flux(solver, sol.state, *sol.state.pi, data, g)), 1e-12 * std::max(1.0, std::abs(a)));
}

TEST(InterfaceFlux, FluidAndSolidTractionsBalance) {
  const ResolventSolver solver(level(0), MaterialParams{0.5, 1.5, 1.2});
  std::mt19937 rng(59);
  const auto data = make_random_data(level(0), rng);
  const auto sol = solver.solve(data);
  const VectorXd solid = solid_traction(solver, sol.state, data);
  for (Index i = 0; i < level(0).num_interface_dofs(); ++i) {
    VectorXd g = VectorXd::Zero(level(0).num_interface_dofs());
    g(i) = 1;
    EXPECT_NEAR(interface_flux(solver, sol.state, *sol.state.pi, data, g), solid(i), 1e-9);
  }
}

TEST(InterfaceFlux, RejectsNonTraces) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const auto s = FsiState::zero(level(0));
  const VectorXd pi = VectorXd::Zero(level(0).num_pressure_dofs());
  const auto data = ResolventData::zero(level(0));
  EXPECT_THROW(interface_flux(solver, s, pi, data, VectorXd::Zero(5)), ContractViolation);
  VectorXd ext = VectorXd::Zero(level(0).num_velocity_dofs());
  ext(level(0).constrained_velocity_dofs().front()) = 1;
  EXPECT_THROW(interface_flux_extended(solver, s, pi, data, ext), ContractViolation);
}

TEST(InterfaceFlux, NormalTraceHasUnitNormalComponent) {
  const auto g = interface_normal_trace(level(1));
  for (std::size_t k = 0; k < level(1).interface.size(); ++k) {
    const Vector2 x = level(1).fluid_nodes[level(1).interface[k].fluid_node];
    const Vector2 n = g.segment<2>(2 * static_cast<Index>(k));
    // Points into the solid; corners carry both side normals.
    const bool corner = (std::abs(x.x() - 1.0 / 3) < 1e-12 || std::abs(x.x() - 2.0 / 3) < 1e-12) &&
                        (std::abs(x.y() - 1.0 / 3) < 1e-12 || std::abs(x.y() - 2.0 / 3) < 1e-12);
    EXPECT_NEAR(n.cwiseAbs().sum(), corner ? 2.0 : 1.0, 1e-15);
    EXPECT_GT(n.dot(Vector2(0.5, 0.5) - x), 0.0);
  }
}

namespace {

// u = 0, pi = c, w linear with sigma(w) = -c I: an exact discrete solution
// for data (0, lambda w, w).
struct ConstantPressureCase {
  MaterialParams params{0.5, 2.0, 1.5};
  double c = 0.75;
  ResolventData data;

  explicit ConstantPressureCase(const TaylorHoodSpace& space) {
    const double a = -c / (2 * (params.lame_lambda + params.lame_mu));
    const VectorXd w = interpolate(
        space, [a](const Vector2& x) { return Vector2(a * (x.x() - 0.5), a * (x.y() - 0.5)); }, Field::Displacement);
    data = {VectorXd::Zero(space.num_velocity_dofs()), params.shift * w, w};
  }
};

} // namespace

TEST(RecoverC0, ConstantPressureIsRecovered) {
  const ConstantPressureCase cp(level(1));
  const ResolventSolver solver(level(1), cp.params);
  const auto sol = solver.solve(cp.data);
  EXPECT_LE(sol.state.u.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((sol.state.pi->array() - cp.c).abs().maxCoeff(), 1e-11);
  const auto split = decompose_pressure(level(1), *sol.state.pi);
  EXPECT_NEAR(split.c0, cp.c, 1e-11);
  EXPECT_NEAR(recover_c0(solver, sol.state, split.q0, cp.data, FluxEvaluation::Variational), cp.c, 1e-10);
  EXPECT_NEAR(recover_c0(solver, sol.state, split.q0, cp.data, FluxEvaluation::Pointwise), cp.c, 1e-10);
}

TEST(RecoverC0, ZeroState) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const VectorXd q0 = VectorXd::Zero(level(0).num_pressure_dofs());
  for (auto mode : {FluxEvaluation::Variational, FluxEvaluation::Pointwise})
    EXPECT_EQ(recover_c0(solver, FsiState::zero(level(0)), q0, ResolventData::zero(level(0)), mode), 0.0);
}

TEST(RecoverC0, VariationalEqualsDecompositionForRandomData) {
  const ResolventSolver solver(level(0), MaterialParams{});
  std::mt19937 rng(61);
  const auto data = make_random_data(level(0), rng);
  const auto sol = solver.solve(data);
  const auto split = decompose_pressure(level(0), *sol.state.pi);
  EXPECT_NEAR(recover_c0(solver, sol.state, split.q0, data, FluxEvaluation::Variational), split.c0,
              1e-9 * std::max(1.0, std::abs(split.c0)));
}

TEST(RecoverC0, PointwiseGapShrinksUnderRefinement) {
  const auto c = manufactured_case(1.0);
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 3; ++k) {
    const ResolventSolver solver(level(k), MaterialParams{});
    const auto data = manufactured_data(level(k), c);
    const auto sol = solver.solve(data);
    const auto split = decompose_pressure(level(k), *sol.state.pi);
    const double gap = std::abs(recover_c0(solver, sol.state, split.q0, data, FluxEvaluation::Pointwise) - split.c0);
    EXPECT_LT(gap, previous) << "level " << k;
    previous = gap;
  }
}

// ---------------------------------------------------------------------------
// Domain conditions

TEST(DomainConditions, PassAfterAnySolve) {
  std::mt19937 rng(5);
  for (const MaterialParams p : {MaterialParams{}, MaterialParams{2.0, 0.5, 0.2}, MaterialParams{0.0, 3.0, 7.0}}) {
    const ResolventSolver solver(level(1), p);
    const auto data = make_random_data(level(1), rng);
    const auto sol = solver.solve(data);
    const auto report = check_domain_conditions(solver, sol.state, *sol.state.pi, data);
    ASSERT_EQ(report.checks.size(), 4u);
    for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.residual;
    EXPECT_TRUE(report.all_passed());
  }
}

TEST(DomainConditions, CorruptedGammaFDofFails) {
  const ResolventSolver solver(level(0), MaterialParams{});
  std::mt19937 rng(7);
  const auto data = make_random_data(level(0), rng);
  auto sol = solver.solve(data);
  sol.state.u(level(0).constrained_velocity_dofs()[3]) = 0.25;
  const auto report = check_domain_conditions(solver, sol.state, *sol.state.pi, data);
  EXPECT_FALSE(report.checks[0].passed);
  EXPECT_EQ(report.checks[0].residual, 0.25);
  EXPECT_FALSE(report.all_passed());
}

TEST(DomainConditions, ZeroStateZeroData) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const auto report = check_domain_conditions(solver, FsiState::zero(level(0)),
                                              VectorXd::Zero(level(0).num_pressure_dofs()), ResolventData::zero(level(0)));
  for (const auto& c : report.checks) {
    EXPECT_TRUE(c.passed);
    EXPECT_EQ(c.residual, 0.0);
  }
}

TEST(DomainConditions, StatedTolerances) {
  const ResolventSolver solver(level(0), MaterialParams{});
  const auto report = check_domain_conditions(solver, FsiState::zero(level(0)),
                                              VectorXd::Zero(level(0).num_pressure_dofs()), ResolventData::zero(level(0)));
  EXPECT_EQ(report.checks[0].tolerance, 1e-12);
  EXPECT_EQ(report.checks[1].tolerance, 1e-12);
  EXPECT_EQ(report.checks[2].tolerance, 1e-10);
  EXPECT_EQ(report.checks[3].tolerance, 1e-9);
}
