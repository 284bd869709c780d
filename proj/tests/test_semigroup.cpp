#include "fsi/analysis.hpp"
#include "fsi/oracle.hpp"
#include "fsi/semigroup.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace fsi;

namespace {

const TaylorHoodSpace& level(int k) {
  static std::map<int, TaylorHoodSpace> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_space(generate_mesh(k))).first;
  return it->second;
}

VectorXd stacked(const FsiState& s) {
  VectorXd y(s.u.size() + s.w.size() + s.z.size());
  y << s.u, s.w, s.z;
  return y;
}

FsiState scaled(FsiState s, double a) {
  s.u *= a;
  s.w *= a;
  s.z *= a;
  return s;
}

// Repeated resolvent applications give an initial state smooth enough for
// backward Euler to show its full first order.
FsiState smooth_state(const TaylorHoodSpace& space, const MaterialParams& params, unsigned seed) {
  const ResolventSolver solver(space, params);
  FsiState y = solver.solve(random_resolvent_data(space, seed)).state;
  const EnergyForm e(space, params);
  const SparseMatrix& m = e.fluid_mass();
  for (int k = 0; k < 2; ++k) y = solver.solve({m * y.u, y.w, y.z}).state;
  return y;
}

double distance(const EnergyForm& e, const FsiState& a, const FsiState& b) {
  FsiState d = a;
  d.u -= b.u;
  d.w -= b.w;
  d.z -= b.z;
  return e.norm(d);
}

} // namespace

TEST(HNorm, ZeroState) { EXPECT_EQ(h_norm(level(0), MaterialParams{}, FsiState::zero(level(0))), 0.0); }

TEST(HNorm, Homogeneous) {
  const MaterialParams p;
  const auto y = random_state(level(0), 3);
  const double n = h_norm(level(0), p, y);
  EXPECT_GT(n, 0.0);
  EXPECT_NEAR(h_norm(level(0), p, scaled(y, -2.5)), 2.5 * n, 1e-12 * n);
}

TEST(HNorm, MatchesDenseGram) {
  const MaterialParams p{0.7, 1.9, 1.0};
  const Eigen::MatrixXd g = oracle::energy_gram(level(0), p);
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto y = random_state(level(0), seed);
    const VectorXd v = stacked(y);
    const double expected = std::sqrt(v.dot(g * v));
    EXPECT_NEAR(h_norm(level(0), p, y), expected, 1e-12 * expected);
  }
}

TEST(HNorm, ComponentsAddUp) {
  const MaterialParams p;
  const EnergyForm e(level(0), p);
  const auto y = random_state(level(0), 5);
  const auto c = e.components(y);
  EXPECT_GT(c.fluid, 0.0);
  EXPECT_GT(c.solid_potential, 0.0);
  EXPECT_GT(c.solid_kinetic, 0.0);
  EXPECT_NEAR(std::sqrt(c.total()), e.norm(y), 1e-14 * e.norm(y));
  EXPECT_NEAR(e.inner(y, y), c.total(), 1e-12 * c.total());
}

TEST(HNorm, RejectsWrongSizes) {
  FsiState y = FsiState::zero(level(0));
  y.w.resize(4);
  EXPECT_THROW(h_norm(level(0), MaterialParams{}, y), ContractViolation);
}

TEST(RandomState, VanishesOnOuterBoundary) {
  const auto y = random_state(level(1), 11);
  for (Index d : level(1).constrained_velocity_dofs()) EXPECT_EQ(y.u(d), 0.0);
  EXPECT_EQ(stacked(y), stacked(random_state(level(1), 11)));
}

TEST(Step, ZeroStaysZero) {
  const auto r = step(level(0), MaterialParams{1, 1, 100}, FsiState::zero(level(0)));
  EXPECT_EQ(stacked(r.state).norm(), 0.0);
  EXPECT_EQ(r.pressure.norm(), 0.0);
}

TEST(Step, IsAContraction) {
  const MaterialParams p{1, 1, 50};
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto y = random_state(level(0), seed);
    const auto r = step(level(0), p, y);
    EXPECT_LE(h_norm(level(0), p, r.state), h_norm(level(0), p, y));
  }
}

TEST(Step, RandomStatesGiveMonotoneSequences) {
  const MaterialParams p;
  const Stepper stepper(level(0), p, 0.01);
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto y = random_state(level(0), 1000 + seed);
    const auto r = stepper.step(y);
    EXPECT_LE(stepper.energy().norm(r.state), stepper.energy().norm(y) * (1 + 1e-12)) << "seed " << seed;
  }
}

TEST(Step, RejectsNonPositiveDt) {
  EXPECT_THROW(Stepper(level(0), MaterialParams{}, 0.0), ContractViolation);
  EXPECT_THROW(Stepper(level(0), MaterialParams{}, -1.0), ContractViolation);
}

TEST(Evolve, ZeroInitialStateGivesFlatTrace) {
  const auto r = evolve(level(0), MaterialParams{}, FsiState::zero(level(0)), EvolutionConfig{0.5, 10, 1});
  ASSERT_EQ(r.trace.rows.size(), 11u);
  for (const auto& row : r.trace.rows) {
    EXPECT_EQ(row.energy.total(), 0.0);
    EXPECT_EQ(row.dissipation, 0.0);
  }
  EXPECT_TRUE(r.trace.monotone);
}

TEST(Evolve, EnergyDecreasesAndBalances) {
  const MaterialParams p;
  const auto r = evolve(level(1), p, random_state(level(1), 21), EvolutionConfig{1.0, 100, 1});
  EXPECT_TRUE(r.trace.monotone);
  EXPECT_LE(r.trace.final_energy(), r.trace.initial_energy);
  EXPECT_LE(r.trace.balance_error(), 1e-6);
  // The continuous budget alone is an upper bound on the energy lost.
  EXPECT_LE(r.trace.cumulative_dissipation, r.trace.initial_energy - r.trace.final_energy() + 1e-12);
  for (std::size_t k = 1; k < r.trace.rows.size(); ++k)
    EXPECT_LE(r.trace.rows[k].energy.total(), r.trace.rows[k - 1].energy.total() * (1 + 1e-12));
}

TEST(Evolve, RecordEverySubsamplesWithoutChangingSums) {
  const MaterialParams p;
  const auto y = random_state(level(0), 23);
  const auto all = evolve(level(0), p, y, EvolutionConfig{0.2, 20, 1});
  const auto some = evolve(level(0), p, y, EvolutionConfig{0.2, 20, 5});
  EXPECT_EQ(some.trace.rows.size(), 5u);
  EXPECT_EQ(some.trace.rows.back().step, 20);
  EXPECT_DOUBLE_EQ(some.trace.cumulative_dissipation, all.trace.cumulative_dissipation);
  EXPECT_EQ(stacked(some.final_state), stacked(all.final_state));
}

TEST(Evolve, FirstOrderSelfConvergence) {
  const MaterialParams p;
  const EnergyForm e(level(0), p);
  const auto y0 = smooth_state(level(0), p, 29);
  std::vector<EvolutionResult> runs;
  for (int n : {20, 40, 80}) runs.push_back(evolve(level(0), p, y0, EvolutionConfig{0.5, n, n}));
  const double d1 = distance(e, runs[0].final_state, runs[1].final_state);
  const double d2 = distance(e, runs[1].final_state, runs[2].final_state);
  EXPECT_NEAR(d1 / d2, 2.0, 0.2);
  const auto& mp = assemble_pressure_mass(level(0));
  const VectorXd p1 = runs[0].final_pressure - runs[1].final_pressure;
  const VectorXd p2 = runs[1].final_pressure - runs[2].final_pressure;
  EXPECT_LT(p2.dot(mp * p2), p1.dot(mp * p1));
}

TEST(Evolve, InvalidConfig) {
  const auto y = FsiState::zero(level(0));
  EXPECT_THROW(evolve(level(0), MaterialParams{}, y, EvolutionConfig{1.0, 0, 1}), ContractViolation);
  EXPECT_THROW(evolve(level(0), MaterialParams{}, y, EvolutionConfig{-1.0, 10, 1}), ContractViolation);
  EXPECT_THROW(evolve(level(0), MaterialParams{}, y, EvolutionConfig{1.0, 10, 0}), ContractViolation);
}

TEST(Evolve, EnergyCsvColumns) {
  const auto r = evolve(level(0), MaterialParams{}, random_state(level(0), 31), EvolutionConfig{0.1, 4, 1});
  const auto path = std::filesystem::temp_directory_path() / "fsi_test_energy.csv";
  write_energy_csv(r.trace, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,time,E_total,E_fluid,E_solid_potential,E_solid_kinetic,dissipation");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
  }
  EXPECT_EQ(rows, 5);
  std::filesystem::remove(path);
}

TEST(EnergyIdentity, ZeroData) {
  const auto id = energy_identity_check(level(0), MaterialParams{}, ResolventData::zero(level(0)));
  EXPECT_EQ(id.residual, 0.0);
  EXPECT_TRUE(id.passed());
}

TEST(EnergyIdentity, RandomDataAcrossShifts) {
  for (double shift : {0.1, 1.0, 10.0}) {
    const ResolventSolver solver(level(1), MaterialParams{1, 1, shift});
    for (unsigned seed = 0; seed < 50; ++seed) {
      const auto id = energy_identity_check(solver, random_resolvent_data(level(1), seed));
      EXPECT_TRUE(id.passed()) << "shift " << shift << " seed " << seed << " residual " << id.residual;
      // Dissipative: the generator form is never positive.
      EXPECT_LE(id.generator_form, 1e-10 * std::max(1.0, id.dissipation));
      EXPECT_GE(id.dissipation, 0.0);
    }
  }
}

TEST(EnergyIdentity, ManufacturedData) {
  const auto c = manufactured_case(1.0);
  const auto id = energy_identity_check(level(1), MaterialParams{}, manufactured_data(level(1), c));
  EXPECT_LE(id.residual, 1e-8);
}
