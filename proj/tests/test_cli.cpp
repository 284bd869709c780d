#include "cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fsi::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fsi_cli");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = main_with_args(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("fsi_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

} // namespace

TEST(Cli, ParsesModesAndLevels) {
  EXPECT_EQ(parse_mode("infsup"), Mode::Infsup);
  EXPECT_EQ(mode_name(Mode::Certify), "certify");
  EXPECT_THROW(parse_mode("fast"), UsageError);
  EXPECT_EQ(parse_levels("0,1,3"), (std::vector<int>{0, 1, 3}));
  EXPECT_THROW(parse_levels("0,x"), UsageError);
  EXPECT_THROW(parse_levels(""), UsageError);
}

TEST(Cli, DefaultLevels) {
  EXPECT_EQ(default_levels(Mode::Convergence), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(default_levels(Mode::Resolvent), (std::vector<int>{0}));
  EXPECT_EQ(default_levels(Mode::Certify).size(), 1u);
}

TEST(Cli, ValidationMessagesNameTheField) {
  const auto message = [](RunConfig c) {
    try {
      c.validate();
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  RunConfig c;
  c.levels = {0};
  c.shift = 0;
  EXPECT_EQ(message(c).rfind("lambda:", 0), 0u);
  c = RunConfig{};
  c.levels = {0};
  c.lame_mu = -1;
  EXPECT_EQ(message(c).rfind("mu:", 0), 0u);
  c = RunConfig{};
  c.levels = {2, 1};
  c.mode = Mode::Convergence;
  EXPECT_EQ(message(c).rfind("levels:", 0), 0u);
  c = RunConfig{};
  c.levels = {0, 1};
  EXPECT_NE(message(c).find("single level"), std::string::npos);
  c = RunConfig{};
  c.levels = {0};
  c.mode = Mode::Evolve;
  c.n_steps = 0;
  EXPECT_EQ(message(c).rfind("steps:", 0), 0u);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  const auto dir = fresh_dir("usage");
  const auto a = invoke({"--mode", "bogus", "--out", dir.string()});
  EXPECT_EQ(a.code, kExitUsage);
  EXPECT_NE(a.err.find("mode:"), std::string::npos);
  const auto b = invoke({"--mode", "resolvent", "--lambda", "-1", "--out", dir.string()});
  EXPECT_EQ(b.code, kExitUsage);
  EXPECT_NE(b.err.find("lambda: must be positive"), std::string::npos);
  const auto c = invoke({"--mode", "convergence", "--levels", "0,a", "--out", dir.string()});
  EXPECT_EQ(c.code, kExitUsage);
  EXPECT_NE(c.err.find("levels:"), std::string::npos);
  EXPECT_EQ(invoke({"--no-such-flag"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--config", "/nonexistent_dir_for_fsi/cfg"}).code, kExitUsage);
}

TEST(Cli, ResolventWritesStateAndReport) {
  const auto dir = fresh_dir("resolvent");
  const auto r = invoke({"--mode", "resolvent", "--levels", "0", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "state.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "resolvent_report.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["result"]["level"].get<int>(), 0);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, ConvergenceOverFourLevels) {
  const auto dir = fresh_dir("convergence");
  const auto r = invoke({"--mode", "convergence", "--levels", "0,1,2,3", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(line_count(dir / "convergence.csv"), 5);
  EXPECT_EQ(line_count(dir / "rates.csv"), 4);
  const auto j = nlohmann::json::parse(slurp(dir / "convergence_report.json"));
  EXPECT_EQ(j["result"]["rows"].size(), 4u);
}

TEST(Cli, InfsupOverThreeLevels) {
  const auto dir = fresh_dir("infsup");
  const auto r = invoke({"--mode", "infsup", "--levels", "0,1,2", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(line_count(dir / "infsup.csv"), 4);
  const auto j = nlohmann::json::parse(slurp(dir / "infsup_report.json"));
  EXPECT_EQ(j["result"]["rows"].size(), 3u);
  EXPECT_EQ(j["result"]["velocity_norm"].get<std::string>(), "strain");
}

TEST(Cli, EvolveWritesEnergyTrace) {
  const auto dir = fresh_dir("evolve");
  const auto r = invoke({"--mode", "evolve", "--levels", "0", "--steps", "20", "--t-final", "0.5", "--seed", "3",
                         "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(line_count(dir / "energy.csv"), 22);
}

TEST(Cli, CertifyIsReproducible) {
  const auto a = fresh_dir("certify_a"), b = fresh_dir("certify_b");
  ASSERT_EQ(invoke({"--mode", "certify", "--levels", "0", "--seed", "7", "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(invoke({"--mode", "certify", "--levels", "0", "--seed", "7", "--out", b.string()}).code, kExitOk);
  const auto ra = slurp(a / "certify_report.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, slurp(b / "certify_report.json"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = fresh_dir("config");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# resolvent run\nmode = resolvent\nlevels = 0\nlambda = 2.5\nmu = 3\nout = " << dir.string()
                     << "\n";
  ASSERT_EQ(invoke({"--config", cfg.string(), "--lambda", "4"}).code, kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "resolvent_report.json"));
  EXPECT_EQ(j["params"]["lambda"].get<double>(), 4.0);
  EXPECT_EQ(j["params"]["mu"].get<double>(), 3.0);
}

TEST(Cli, ConfigFileRejectsMalformedLines) {
  const auto dir = fresh_dir("badconfig");
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "mode resolvent\n";
  const auto r = invoke({"--config", cfg.string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("bad.cfg:1"), std::string::npos);
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "colour", "blue"), UsageError);
  EXPECT_THROW(apply_setting(c, "steps", "1.5"), UsageError);
}

TEST(Cli, OutDirFallsBackToEnvironment) {
  const auto dir = fresh_dir("env");
  ::setenv("FSI_OUT_DIR", dir.c_str(), 1);
  const auto r = invoke({"--mode", "resolvent", "--levels", "0"});
  ::unsetenv("FSI_OUT_DIR");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "resolvent_report.json"));
}
