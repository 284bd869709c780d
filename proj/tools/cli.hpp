#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fsi::cli {

enum class Mode { Resolvent, Convergence, Infsup, Evolve, Certify };

struct RunConfig {
  Mode mode = Mode::Resolvent;
  std::vector<int> levels;
  double shift = 1.0;
  double lame_lambda = 1.0;
  double lame_mu = 1.0;
  double t_final = 1.0;
  int n_steps = 100;
  std::filesystem::path out_dir = ".";
  unsigned seed = 0;

  /// Throws UsageError with a field-specific message.
  void validate() const;
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);
std::vector<int> parse_levels(const std::string& s);

/// Applies one key=value setting (keys are the long flag names without dashes).
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Reads a key=value file; '#' starts a comment.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Levels used when none were given.
std::vector<int> default_levels(Mode m);

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one mode, writes artifacts under out_dir and a summary to `log`.
/// Returns kExitOk iff every check passed.
int run(const RunConfig& config, std::ostream& log);

/// Parses argv (flags override the config file and FSI_OUT_DIR) and runs.
int main_with_args(int argc, char** argv, std::ostream& log, std::ostream& err);

} // namespace fsi::cli
