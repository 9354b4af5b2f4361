// monolab command-line runner.
#include "monolab/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace monolab;
  CLI::App app{"Monte Carlo verification of log-Harnack, contraction and entropy bounds for monotone SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<Index> paths;
  bool quiet = false;

  std::vector<std::string> names = check_subcommands();
  names.push_back("all");
  names.push_back("bench");
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name, "run " + name);
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--paths", paths, "override the path count")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }

  std::string manifest;
  CLI::App* rep = app.add_subcommand("replay", "re-run a manifest and byte-compare its reports");
  rep->add_option("--manifest", manifest, "manifest.json of the original run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out_dir, "directory for the replayed outputs")->required();
  rep->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == rep) {
    try {
      const ReplayResult r = replay(manifest, *out_dir, quiet);
      for (const auto& f : r.compared) {
        const bool bad = std::find(r.mismatched.begin(), r.mismatched.end(), f) != r.mismatched.end();
        std::cout << (bad ? "DIFFERS   " : "identical ") << f << "\n";
      }
      return r.identical ? kExitPass : kExitFail;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitFail;
    }
  }
  return run_cli(chosen->get_name(), config_path, RunOverrides{seed, out_dir, paths}, quiet);
}
