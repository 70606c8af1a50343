// Command-line driver. All physics comes from the JSON config; the flags
// only choose the command, the config, the output directory and the
// worker count.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "sfnls/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral solver for the stochastic fractional NLS"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<int> workers;
  const char* names[] = {"simulate",    "ensemble",    "dispersive",     "virial-check",
                         "blowup-cert", "figure-data", "validate-config"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run configuration (JSON) or a manifest.json")->required();
    auto* o = sub->add_option("--out", out, "output directory");
    if (std::string(name) != "validate-config") o->required();
    sub->add_option("--workers", workers, "override ensemble.workers");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage] " << e.what() << "\n";
    return sfnls::kExitInvalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return sfnls::run_command(command, config, out, workers, std::cerr);
}
