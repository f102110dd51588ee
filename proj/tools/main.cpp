#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "radsym/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"radsym: rearrangements, constrained minimizers and symmetry checks on grids"};
  std::string config_path;
  std::string command;
  std::string output_dir;
  app.add_option("command", command, "symmetrize | verify | audit | minimize | polarize | lint-model | refine");
  app.add_option("-c,--config", config_path, "JSON run configuration")->required();
  app.add_option("-o,--output-dir", output_dir, "overrides output_dir from the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : radsym::cli::kExitUsage;
  }

  radsym::cli::RunConfig cfg;
  try {
    cfg = radsym::cli::load_config(config_path);
  } catch (const radsym::UsageError& e) {
    std::cerr << "radsym: " << e.what() << '\n';
    return radsym::cli::kExitUsage;
  } catch (const radsym::IoError& e) {
    std::cerr << "radsym: " << e.what() << '\n';
    return radsym::cli::kExitUsage;
  }
  if (!command.empty()) cfg.command = command;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  return radsym::cli::run_guarded(cfg);
}
