// Command-line driver: loads a config, applies overrides, dispatches the
// command, and maps library errors onto the documented exit codes with a
// machine-readable line on stderr.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "preytaxis/config.hpp"
#include "preytaxis/errors.hpp"
#include "preytaxis/runner.hpp"

namespace {

const char* class_name(preytaxis::ErrorClass c) {
  switch (c) {
    case preytaxis::ErrorClass::config: return "config";
    case preytaxis::ErrorClass::convergence: return "convergence";
    case preytaxis::ErrorClass::precondition: return "precondition";
    case preytaxis::ErrorClass::internal: return "internal";
  }
  return "?";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Steady states, bifurcation thresholds, branch continuation and IMEX "
      "simulation for a Dirichlet predator-prey system with prey-taxis"};
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 1;

  app.add_option("command", command,
                 "eig | logistic | thresholds | steady | branch | simulate | "
                 "sweep | figure2 | figure4 (default from config)");
  app.add_option("--config", config_path, "config file (section.key = value lines)");
  app.add_option("--set", overrides, "override, e.g. --set model.lambda=1.5")
      ->take_all();
  app.add_option("--out", out_dir, "output directory (default from config)");
  app.add_option("--workers", workers, "worker threads for sweep/figure commands");

  CLI11_PARSE(app, argc, argv);

  try {
    preytaxis::RunConfig cfg;
    if (!config_path.empty()) cfg = preytaxis::parse_config_file(config_path);
    for (const std::string& s : overrides) preytaxis::apply_override(cfg, s);
    if (!command.empty()) cfg.command = command;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    const std::string summary = preytaxis::run_command(cfg, workers);
    std::cout << cfg.command << ": " << summary << "\n";
    return 0;
  } catch (const preytaxis::Error& e) {
    std::cerr << "error code=" << e.exit_code() << " class=" << class_name(e.error_class())
              << " kind=" << e.kind() << " msg=\"" << e.what() << "\"\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error code=5 class=internal kind=unexpected msg=\"" << e.what()
              << "\"\n";
    return 5;
  }
}
