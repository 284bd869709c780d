#include "cli.hpp"

#include "fsi/analysis.hpp"
#include "fsi/oracle.hpp"
#include "fsi/semigroup.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace fsi::cli {

using json = nlohmann::ordered_json;

Mode parse_mode(const std::string& s) {
  static const std::map<std::string, Mode> modes{{"resolvent", Mode::Resolvent},
                                                 {"convergence", Mode::Convergence},
                                                 {"infsup", Mode::Infsup},
                                                 {"evolve", Mode::Evolve},
                                                 {"certify", Mode::Certify}};
  const auto it = modes.find(s);
  if (it == modes.end())
    throw UsageError("mode: '" + s + "' is not one of resolvent, convergence, infsup, evolve, certify");
  return it->second;
}

std::string mode_name(Mode m) {
  switch (m) {
  case Mode::Resolvent: return "resolvent";
  case Mode::Convergence: return "convergence";
  case Mode::Infsup: return "infsup";
  case Mode::Evolve: return "evolve";
  case Mode::Certify: return "certify";
  }
  return "?";
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("levels: '" + item + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("levels: empty list");
  return out;
}

std::vector<int> default_levels(Mode m) {
  switch (m) {
  case Mode::Convergence:
  case Mode::Infsup: return {0, 1, 2, 3};
  case Mode::Resolvent: return {0};
  case Mode::Evolve:
  case Mode::Certify: return {1};
  }
  return {0};
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw UsageError(key + ": '" + v + "' is not a number");
  return d;
}

long parse_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long d = 0;
  try {
    d = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw UsageError(key + ": '" + v + "' is not an integer");
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

} // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") c.mode = parse_mode(value);
  else if (key == "levels") c.levels = parse_levels(value);
  else if (key == "lambda") c.shift = parse_double(key, value);
  else if (key == "lame-lambda") c.lame_lambda = parse_double(key, value);
  else if (key == "mu") c.lame_mu = parse_double(key, value);
  else if (key == "t-final") c.t_final = parse_double(key, value);
  else if (key == "steps") c.n_steps = static_cast<int>(parse_long(key, value));
  else if (key == "out") c.out_dir = value;
  else if (key == "seed") {
    const long s = parse_long(key, value);
    if (s < 0) throw UsageError("seed: must be nonnegative");
    c.seed = static_cast<unsigned>(s);
  } else throw UsageError("unknown setting '" + key + "'");
}

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot read " + path.string());
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key=value");
    apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::validate() const {
  if (!(shift > 0)) throw UsageError("lambda: must be positive");
  if (!(lame_mu > 0)) throw UsageError("mu: must be positive");
  if (!(lame_lambda >= 0)) throw UsageError("lame-lambda: must be nonnegative");
  for (int l : levels) {
    if (l < 0) throw UsageError("levels: negative level " + std::to_string(l));
    if (l > max_supported_level()) throw UsageError("levels: level " + std::to_string(l) + " is too large");
  }
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end())
    throw UsageError("levels: must be strictly ascending");
  if (mode == Mode::Evolve) {
    if (!(t_final > 0)) throw UsageError("t-final: must be positive");
    if (n_steps <= 0) throw UsageError("steps: must be positive");
  }
  if ((mode == Mode::Resolvent || mode == Mode::Evolve || mode == Mode::Certify) && levels.size() > 1)
    throw UsageError("levels: mode " + mode_name(mode) + " takes a single level");
}

namespace {

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool passed;
};

class Checks {
public:
  void add(std::string name, double value, double tolerance, bool passed) {
    items_.push_back({std::move(name), value, tolerance, passed});
  }
  void at_most(std::string name, double value, double tolerance) {
    add(std::move(name), value, tolerance, value <= tolerance);
  }
  bool all() const {
    return std::all_of(items_.begin(), items_.end(), [](const Check& c) { return c.passed; });
  }
  json to_json() const {
    json a = json::array();
    for (const auto& c : items_)
      a.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    return a;
  }
  void print(std::ostream& os) const {
    for (const auto& c : items_)
      os << (c.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(44) << c.name << std::right
         << std::scientific << std::setprecision(3) << c.value << "  (tol " << c.tolerance << ")\n"
         << std::defaultfloat;
  }

private:
  std::vector<Check> items_;
};

MaterialParams params_of(const RunConfig& c) { return {c.lame_lambda, c.lame_mu, c.shift}; }

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_vector(std::ostream& out, const char* field, const VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) out << field << "," << i << "," << v(i) << "\n";
}

double max_rel(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

json run_resolvent(const RunConfig& c, Checks& checks) {
  const auto params = params_of(c);
  const auto space = build_space(generate_mesh(c.levels.front()));
  const auto mc = manufactured_case(c.shift);
  const ResolventSolver solver(space, params);
  const auto data = manufactured_data(space, mc);
  const auto sol = solver.solve(data);
  const auto& pi = *sol.state.pi;

  std::ofstream out(c.out_dir / "state.csv");
  if (!out) throw std::runtime_error("cannot write " + (c.out_dir / "state.csv").string());
  out << std::setprecision(17) << "field,dof,value\n";
  write_vector(out, "u", sol.state.u);
  write_vector(out, "w", sol.state.w);
  write_vector(out, "z", sol.state.z);
  write_vector(out, "pi", pi);

  const auto report = check_domain_conditions(solver, sol.state, pi, data);
  for (const auto& k : report.checks) checks.add(k.name, k.residual, k.tolerance, k.passed);
  const auto e = error_norms(space, params, sol.state, pi, mc);
  const auto split = decompose_pressure(space, pi);
  return {{"level", c.levels.front()},
          {"relative_residual", sol.report.relative_residual},
          {"errors", {{"u_h1", e.u_h1}, {"u_strain", e.u_strain}, {"pi_l2", e.pi_l2}, {"w_h1", e.w_h1}, {"w_energy", e.w_energy}}},
          {"c0", split.c0},
          {"c0_recovered", recover_c0(solver, sol.state, split.q0, data, FluxEvaluation::Variational)},
          {"c0_pointwise", recover_c0(solver, sol.state, split.q0, data, FluxEvaluation::Pointwise)}};
}

json run_convergence(const RunConfig& c, Checks& checks, std::ostream& log) {
  checks.at_most("data identity residual", verify_data_identity(manufactured_case(c.shift)), 1e-12);
  const auto report = convergence_study(c.levels, params_of(c));
  write_convergence_csv(report, c.out_dir / "convergence.csv");
  write_rates_csv(report, c.out_dir / "rates.csv");
  json rows = json::array();
  for (const auto& r : report.rows) {
    checks.add("level " + std::to_string(r.level) + " solved", r.failure.empty() ? 0.0 : 1.0, 0.0, r.failure.empty());
    rows.push_back({{"level", r.level}, {"elements", r.elements}, {"hypotenuse", r.hypotenuse},
                    {"u_h1", r.errors.u_h1}, {"pi_l2", r.errors.pi_l2}, {"w_h1", r.errors.w_h1},
                    {"failure", r.failure}});
    log << "level " << r.level << ": " << r.elements << " elements, |u_h-u|_1 = " << std::scientific
        << std::setprecision(4) << r.errors.u_h1 << ", |pi_h|_0 = " << r.errors.pi_l2 << ", |w_h|_1 = " << r.errors.w_h1
        << std::defaultfloat << "\n";
  }
  return {{"rows", rows}};
}

json run_infsup(const RunConfig& c, Checks& checks, std::ostream& log) {
  const auto report = infsup_study(c.levels);
  write_infsup_csv(report, c.out_dir / "infsup.csv");
  json rows = json::array();
  for (const auto& r : report.rows) {
    checks.add("beta_h > 0 at level " + std::to_string(r.level), r.beta, 0.0, r.beta > 0);
    rows.push_back({{"level", r.level}, {"h", r.hypotenuse}, {"beta_h", r.beta}});
    log << "level " << r.level << ": beta_h = " << std::setprecision(8) << r.beta << "\n";
  }
  return {{"rows", rows}, {"spread", report.spread()}, {"velocity_norm", report.velocity_norm}};
}

json run_evolve(const RunConfig& c, Checks& checks) {
  const auto params = params_of(c);
  const auto space = build_space(generate_mesh(c.levels.front()));
  const auto result = evolve(space, params, random_state(space, c.seed), {c.t_final, c.n_steps, 1});
  write_energy_csv(result.trace, c.out_dir / "energy.csv");
  const auto& t = result.trace;
  checks.add("energy nonincreasing", t.monotone ? 0.0 : 1.0, 0.0, t.monotone);
  checks.at_most("energy balance (relative)", t.balance_error(), 1e-6);
  const double lost = t.initial_energy - t.final_energy();
  checks.add("dissipation budget", lost, (1 - 1e-6) * t.cumulative_dissipation,
             lost >= (1 - 1e-6) * t.cumulative_dissipation);
  return {{"initial_energy", t.initial_energy},
          {"final_energy", t.final_energy()},
          {"cumulative_dissipation", t.cumulative_dissipation},
          {"cumulative_numerical_dissipation", t.cumulative_numerical}};
}

json run_certify(const RunConfig& c, Checks& checks) {
  const auto params = params_of(c);
  const auto space = build_space(generate_mesh(c.levels.front()));
  const ResolventSolver solver(space, params);

  double worst_identity = 0, max_form = -std::numeric_limits<double>::infinity();
  double worst_domain = 0;
  bool domain_ok = true;
  for (unsigned k = 0; k < 50; ++k) {
    const auto data = random_resolvent_data(space, c.seed * 1000 + k);
    const auto e = energy_identity_check(solver, data);
    worst_identity = std::max(worst_identity, e.residual / std::max(1.0, e.dissipation));
    max_form = std::max(max_form, e.generator_form);
    const auto sol = solver.solve(data);
    const auto rep = check_domain_conditions(solver, sol.state, *sol.state.pi, data);
    domain_ok = domain_ok && rep.all_passed();
    for (const auto& chk : rep.checks) worst_domain = std::max(worst_domain, chk.residual / chk.tolerance);
  }
  checks.at_most("energy identity (50 random data)", worst_identity, 1e-8);
  checks.at_most("(A_h Y, Y)_H <= 0", max_form, 0.0);
  checks.add("domain conditions (50 random data)", worst_domain, 1.0, domain_ok);

  const auto kc = kernel_coercivity(solver, 100, c.seed);
  checks.add("a_lambda >= |eps|^2 on ker B", kc.min_a_over_strain, 1.0, kc.min_a_over_strain >= 1.0);
  checks.add("|eps|^2 >= alpha |v|_1^2 on ker B", kc.min_strain_over_h1, kc.alpha, kc.passed());

  const auto coarse = build_space(generate_mesh(0));
  const auto data = random_resolvent_data(coarse, c.seed);
  const auto sol = solve_resolvent(coarse, params, data);
  const auto ref = oracle::monolithic_solve(coarse, params, data);
  const double oracle_gap = std::max({max_rel(sol.state.u, ref.u), max_rel(*sol.state.pi, *ref.pi),
                                      max_rel(sol.state.w, ref.w)});
  checks.at_most("level-0 monolithic oracle (relative)", oracle_gap, 1e-10);
  checks.at_most("manufactured data identity", verify_data_identity(manufactured_case(c.shift)), 1e-12);
  return {{"level", c.levels.front()}, {"seed", c.seed}, {"alpha", kc.alpha}};
}

} // namespace

int run(const RunConfig& config, std::ostream& log) {
  RunConfig c = config;
  if (c.levels.empty()) c.levels = default_levels(c.mode);
  c.validate();
  std::filesystem::create_directories(c.out_dir);

  Checks checks;
  json body;
  switch (c.mode) {
  case Mode::Resolvent: body = run_resolvent(c, checks); break;
  case Mode::Convergence: body = run_convergence(c, checks, log); break;
  case Mode::Infsup: body = run_infsup(c, checks, log); break;
  case Mode::Evolve: body = run_evolve(c, checks); break;
  case Mode::Certify: body = run_certify(c, checks); break;
  }
  checks.print(log);
  const json report{{"mode", mode_name(c.mode)},
                    {"params", {{"lambda", c.shift}, {"lame_lambda", c.lame_lambda}, {"mu", c.lame_mu}}},
                    {"result", body},
                    {"checks", checks.to_json()},
                    {"passed", checks.all()}};
  write_json(report, c.out_dir / (mode_name(c.mode) + "_report.json"));
  return checks.all() ? kExitOk : kExitCheckFailed;
}

int main_with_args(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Coupled Stokes / elasticity resolvent solver"};
  std::map<std::string, std::string> flags;
  const std::vector<std::pair<std::string, std::string>> options{
      {"mode", "resolvent | convergence | infsup | evolve | certify"},
      {"levels", "comma-separated refinement levels"},
      {"lambda", "resolvent shift"},
      {"lame-lambda", "first Lame parameter"},
      {"mu", "shear modulus"},
      {"t-final", "final time (evolve)"},
      {"steps", "number of time steps (evolve)"},
      {"out", "output directory (default: $FSI_OUT_DIR or .)"},
      {"seed", "seed for random states and data"}};
  for (const auto& [name, help] : options) app.add_option("--" + name, flags[name], help);
  std::string config_file;
  app.add_option("--config", config_file, "key=value file; flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config;
    if (const char* env = std::getenv("FSI_OUT_DIR"); env && *env) config.out_dir = env;
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& [name, help] : options)
      if (app.count("--" + name) > 0) apply_setting(config, name, flags[name]);
    return run(config, log);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const ContractViolation& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure [" << e.module() << "]: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

} // namespace fsi::cli
