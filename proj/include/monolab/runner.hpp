#pragma once

#include "monolab/config.hpp"
#include "monolab/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace monolab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInconclusive = 2, kExitConfig = 3 };
int exit_code(Verdict v);

/// Subcommands in the order `all` runs them (bench and replay are separate).
const std::vector<std::string>& check_subcommands();
bool is_subcommand(const std::string& name);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<Index> paths;
};

void apply_overrides(ExperimentConfig& config, const RunOverrides& overrides);

struct SubcommandOutput {
  std::string name;
  Verdict verdict = Verdict::Pass;
  std::vector<std::string> files;  // relative to the output directory
  double seconds = 0.0;
};

struct RunOutcome {
  Verdict verdict = Verdict::Pass;
  std::vector<SubcommandOutput> parts;
  std::string manifest_path;
};

/// Runs a validated config; writes <sub>.jsonl (and <sub>.csv for time
/// curves) per executed subcommand plus one manifest.json into config.out_dir.
RunOutcome run_experiment(const std::string& subcommand, const ExperimentConfig& config, bool quiet);

/// Full CLI path: load, override, validate, run. Returns the exit status.
int run_cli(const std::string& subcommand, const std::string& config_path, const RunOverrides& overrides,
            bool quiet);

struct ReplayResult {
  bool identical = false;
  std::vector<std::string> compared;
  std::vector<std::string> mismatched;
};

/// Re-runs the manifest's subcommand into `out_dir` and byte-compares every
/// report file against the originals next to the manifest.
ReplayResult replay(const std::string& manifest_path, const std::string& out_dir, bool quiet);

}  // namespace monolab
