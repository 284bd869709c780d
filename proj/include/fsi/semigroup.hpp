#pragma once

#include "fsi/solver.hpp"

#include <filesystem>

namespace fsi {

/// Squared energy-norm contributions of a state.
struct EnergyComponents {
  double fluid = 0;           // ||u||^2
  double solid_potential = 0; // (sigma(w), eps(w)) + ||w||^2
  double solid_kinetic = 0;   // ||z||^2
  double total() const { return fluid + solid_potential + solid_kinetic; }
};

/// Gram matrices of the energy inner product.
class EnergyForm {
public:
  EnergyForm(const TaylorHoodSpace& space, const MaterialParams& params);

  EnergyComponents components(const FsiState& s) const;
  double norm(const FsiState& s) const;
  double inner(const FsiState& a, const FsiState& b) const;
  /// ||eps(u)||^2 over the fluid.
  double dissipation(const VectorXd& u) const;

  const SparseMatrix& fluid_mass() const { return fluid_mass_; }

private:
  SparseMatrix fluid_mass_, fluid_strain_, solid_energy_, solid_mass_;
};

/// Energy norm. Depends on the Lame parameters through (sigma(w), eps(w)).
double h_norm(const TaylorHoodSpace& space, const MaterialParams& params, const FsiState& state);

struct EvolutionConfig {
  double t_final = 1.0;
  int n_steps = 100;
  int record_every = 1;

  double dt() const { return t_final / n_steps; }
  void validate() const;
};

struct EnergyTraceRow {
  int step = 0;
  double time = 0;
  EnergyComponents energy;
  double dissipation = 0;           // ||eps(u_k)||^2
  double numerical_dissipation = 0; // ||Y_k - Y_{k-1}||^2 in the energy norm
};

/// Recorded rows plus running sums over every step (recorded or not).
struct EnergyTrace {
  std::vector<EnergyTraceRow> rows;
  double initial_energy = 0;            // E(0)^2
  double cumulative_dissipation = 0;    // sum 2 dt ||eps(u_k)||^2
  double cumulative_numerical = 0;      // sum ||Y_k - Y_{k-1}||^2
  bool monotone = true;                 // every step satisfied E_k <= E_{k-1} (1 + 1e-12)

  double final_energy() const { return rows.empty() ? initial_energy : rows.back().energy.total(); }
  /// |E(0)^2 - E^2 - budget| / max(E(0)^2, tiny), budget including the numerical term.
  double balance_error() const;
};

struct StepResult {
  FsiState state;
  VectorXd pressure;
  EnergyTraceRow row;
};

/// Backward Euler for the semi-discrete system: each step solves
/// (lambda - A_h) Y' = lambda Y with lambda = 1/dt. The factorization is
/// built once.
class Stepper {
public:
  Stepper(const TaylorHoodSpace& space, const MaterialParams& params, double dt);

  StepResult step(const FsiState& state) const;
  const EnergyForm& energy() const { return energy_; }
  double dt() const { return dt_; }

private:
  double dt_;
  ResolventSolver solver_;
  EnergyForm energy_;
};

/// One step with params.shift = 1/dt.
StepResult step(const TaylorHoodSpace& space, const MaterialParams& params, const FsiState& state);

struct EvolutionResult {
  EnergyTrace trace;
  FsiState final_state;
  VectorXd final_pressure;
};

EvolutionResult evolve(const TaylorHoodSpace& space, const MaterialParams& params,
                       const FsiState& initial, const EvolutionConfig& config);

/// Columns: step, time, E_total, E_fluid, E_solid_potential, E_solid_kinetic, dissipation.
void write_energy_csv(const EnergyTrace& trace, const std::filesystem::path& path);

struct EnergyIdentity {
  double residual = 0;         // |(A_h Y, Y)_H + ||eps(u)||^2|
  double generator_form = 0;   // (A_h Y, Y)_H = (lambda Y - Y*, Y)_H
  double dissipation = 0;      // ||eps(u)||^2
  bool passed(double tol = 1e-8) const;
};

EnergyIdentity energy_identity_check(const ResolventSolver& solver, const ResolventData& data);
EnergyIdentity energy_identity_check(const TaylorHoodSpace& space, const MaterialParams& params,
                                     const ResolventData& data);

/// Random conforming state (zero on Gamma_f) with standard normal entries.
FsiState random_state(const TaylorHoodSpace& space, unsigned seed);
/// Random data with standard normal entries; the fluid part is a load vector.
ResolventData random_resolvent_data(const TaylorHoodSpace& space, unsigned seed);

} // namespace fsi
