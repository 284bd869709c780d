#include "fsi/semigroup.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace fsi {

EnergyForm::EnergyForm(const TaylorHoodSpace& space, const MaterialParams& params) {
  params.validate();
  fluid_mass_ = assemble(space, params, Form::FluidMass);
  fluid_strain_ = assemble(space, params, Form::FluidStrain);
  solid_mass_ = assemble(space, params, Form::SolidMass);
  solid_energy_ = assemble(space, params, Form::SolidStiffness) + solid_mass_;
}

EnergyComponents EnergyForm::components(const FsiState& s) const {
  require(s.u.size() == fluid_mass_.rows() && s.w.size() == solid_mass_.rows() && s.z.size() == solid_mass_.rows(),
          "EnergyForm: state does not conform to the space");
  return {s.u.dot(fluid_mass_ * s.u), s.w.dot(solid_energy_ * s.w), s.z.dot(solid_mass_ * s.z)};
}

double EnergyForm::norm(const FsiState& s) const { return std::sqrt(std::max(0.0, components(s).total())); }

double EnergyForm::inner(const FsiState& a, const FsiState& b) const {
  return a.u.dot(fluid_mass_ * b.u) + a.w.dot(solid_energy_ * b.w) + a.z.dot(solid_mass_ * b.z);
}

double EnergyForm::dissipation(const VectorXd& u) const { return u.dot(fluid_strain_ * u); }

double h_norm(const TaylorHoodSpace& space, const MaterialParams& params, const FsiState& state) {
  return EnergyForm(space, params).norm(state);
}

void EvolutionConfig::validate() const {
  if (n_steps <= 0) throw ContractViolation("EvolutionConfig: n_steps must be positive");
  if (record_every <= 0) throw ContractViolation("EvolutionConfig: record_every must be positive");
  if (!(t_final > 0)) throw ContractViolation("EvolutionConfig: t_final must be positive");
}

double EnergyTrace::balance_error() const {
  const double lost = initial_energy - final_energy();
  return std::abs(lost - cumulative_dissipation - cumulative_numerical) / std::max(initial_energy, 1e-300);
}

namespace {

MaterialParams with_shift(MaterialParams p, double dt) {
  require(dt > 0, "Stepper: dt must be positive");
  p.shift = 1.0 / dt;
  return p;
}

FsiState difference(const FsiState& a, const FsiState& b) { return {a.u - b.u, a.w - b.w, a.z - b.z, std::nullopt}; }

} // namespace

Stepper::Stepper(const TaylorHoodSpace& space, const MaterialParams& params, double dt)
    : dt_(dt), solver_(space, with_shift(params, dt)), energy_(space, params) {}

StepResult Stepper::step(const FsiState& state) const {
  const double lam = 1.0 / dt_;
  const ResolventData data{lam * (energy_.fluid_mass() * state.u), lam * state.w, lam * state.z};
  auto sol = solver_.solve(data);
  StepResult r;
  r.pressure = *sol.state.pi;
  r.state = std::move(sol.state);
  r.row.energy = energy_.components(r.state);
  r.row.dissipation = energy_.dissipation(r.state.u);
  const FsiState d = difference(r.state, state);
  r.row.numerical_dissipation = energy_.components(d).total();
  return r;
}

StepResult step(const TaylorHoodSpace& space, const MaterialParams& params, const FsiState& state) {
  return Stepper(space, params, 1.0 / params.shift).step(state);
}

EvolutionResult evolve(const TaylorHoodSpace& space, const MaterialParams& params,
                       const FsiState& initial, const EvolutionConfig& config) {
  config.validate();
  const Stepper stepper(space, params, config.dt());
  EvolutionResult out;
  auto& trace = out.trace;
  const auto e0 = stepper.energy().components(initial);
  trace.initial_energy = e0.total();
  trace.rows.push_back({0, 0.0, e0, stepper.energy().dissipation(initial.u), 0.0});

  FsiState state = initial;
  double previous = trace.initial_energy;
  for (int k = 1; k <= config.n_steps; ++k) {
    auto r = stepper.step(state);
    r.row.step = k;
    r.row.time = k * config.dt();
    const double e = r.row.energy.total();
    if (std::sqrt(std::max(0.0, e)) > std::sqrt(previous) * (1 + 1e-12)) trace.monotone = false;
    previous = e;
    trace.cumulative_dissipation += 2 * config.dt() * r.row.dissipation;
    trace.cumulative_numerical += r.row.numerical_dissipation;
    if (k % config.record_every == 0 || k == config.n_steps) trace.rows.push_back(r.row);
    state = std::move(r.state);
    out.final_pressure = std::move(r.pressure);
  }
  out.final_state = std::move(state);
  if (out.final_pressure.size() == 0) out.final_pressure = VectorXd::Zero(space.num_pressure_dofs());
  return out;
}

void write_energy_csv(const EnergyTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "step,time,E_total,E_fluid,E_solid_potential,E_solid_kinetic,dissipation\n";
  for (const auto& r : trace.rows)
    out << r.step << "," << r.time << "," << r.energy.total() << "," << r.energy.fluid << ","
        << r.energy.solid_potential << "," << r.energy.solid_kinetic << "," << r.dissipation << "\n";
}

bool EnergyIdentity::passed(double tol) const {
  return residual <= tol * std::max(1.0, dissipation) && generator_form <= tol * std::max(1.0, dissipation);
}

EnergyIdentity energy_identity_check(const ResolventSolver& solver, const ResolventData& data) {
  const auto sol = solver.solve(data);
  const auto& y = sol.state;
  const double lam = solver.params().shift;
  const EnergyForm h(solver.space(), solver.params());
  // (lambda Y - Y*, Y)_H; the fluid datum enters through its load vector.
  const FsiState shifted{VectorXd::Zero(y.u.size()), lam * y.w - data.w_star, lam * y.z - data.z_star, std::nullopt};
  const double fluid = lam * y.u.dot(h.fluid_mass() * y.u) - data.fluid_load.dot(y.u);
  EnergyIdentity r;
  r.generator_form = fluid + h.inner(shifted, y);
  r.dissipation = h.dissipation(y.u);
  r.residual = std::abs(r.generator_form + r.dissipation);
  return r;
}

EnergyIdentity energy_identity_check(const TaylorHoodSpace& space, const MaterialParams& params,
                                     const ResolventData& data) {
  return energy_identity_check(ResolventSolver(space, params), data);
}

FsiState random_state(const TaylorHoodSpace& space, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  FsiState s = FsiState::zero(space);
  for (Index d : space.free_velocity_dofs()) s.u(d) = n(rng);
  for (Index i = 0; i < s.w.size(); ++i) s.w(i) = n(rng);
  for (Index i = 0; i < s.z.size(); ++i) s.z(i) = n(rng);
  return s;
}

ResolventData random_resolvent_data(const TaylorHoodSpace& space, unsigned seed) {
  const FsiState s = random_state(space, seed);
  const SparseMatrix m = assemble(space, MaterialParams{}, Form::FluidMass);
  return {m * s.u, s.w, s.z};
}

} // namespace fsi
