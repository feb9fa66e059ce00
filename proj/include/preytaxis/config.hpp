#pragma once

// Flat line-oriented run configuration: `section.key = value` with one key
// per line, '#' comments, documented defaults for every key, and hard errors
// (with line numbers) on unknown keys or malformed values. Serialization is
// canonical and round-trips to an identical configuration.

#include <string>
#include <vector>

#include "preytaxis/continuation.hpp"
#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/timestepper.hpp"

namespace preytaxis {

// Motility choice: "constant:c" (d = c) or "rational:a,b" (d = 1 + a/(1+bv)).
struct MotilityChoice {
  std::string kind = "constant";
  std::vector<double> args = {1.0};

  bool operator==(const MotilityChoice&) const = default;
};

// Initial-field grammar: "constant:c", "sine:a,b,k" (a + b sin(kx)),
// "omega:s" (s times the prey-only state), "theta:s" (s times the
// predator-only state), "predictor" (steady starts only: first-order
// coexistence-branch predictor off the prey-only state).
struct InitSpec {
  std::string kind = "constant";
  std::vector<double> args = {0.0};

  bool operator==(const InitSpec&) const = default;
};

// Parameter ladder: "list:v1,v2,..." or "linspace:lo,hi,k".
struct Ladder {
  std::string kind = "list";
  std::vector<double> args;

  std::vector<double> values() const;
  bool operator==(const Ladder&) const = default;
};

struct RunConfig {
  std::string command = "thresholds";

  double lambda = 1.5;
  double mu = 2.0;
  double gamma = 0.6;
  double D = 1.0;
  std::string response_label = "lotka-volterra";
  double zeta = 1.0;
  MotilityChoice d_choice;
  double chi0 = 1.0;

  double L = 4.0;
  int n = 256;

  double newton_tol = 1e-9;
  int newton_max_iter = 50;
  double class_threshold = 1e-8;

  ContinuationControls branch;

  double dt = 1e-3;
  double T = 500.0;
  int snapshot_stride = 0;
  double regime_threshold = 1e-2;
  bool auto_dt = true;
  bool reaction_on = true;
  int max_dt_halvings = 40;
  InitSpec u0{"sine", {0.1, 0.1, 5.0}};
  InitSpec v0{"sine", {0.1, 0.1, 5.0}};

  double eig_p = 1.0, eig_q = 0.0, eig_r = 1.0;

  double logistic_p = 1.0, logistic_a = 1.5, logistic_b = 1.0;

  InitSpec steady_u0{"predictor", {}};
  InitSpec steady_v0{"predictor", {}};

  Ladder sweep_lambda{"list", {-1.0, 1.5, 5.0}};
  std::string sweep_command = "thresholds";

  Ladder thresholds_lambda{"linspace", {-1.0, 5.0, 13.0}};

  std::string out_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

// Parses and validates (grid/parameter sanity plus the model hypotheses);
// throws config errors carrying the offending line number.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Applies one `section.key=value` override (the --set flag).
void apply_override(RunConfig& cfg, const std::string& assignment);

// Re-validates a config after overrides (the same checks parse_config runs).
void validate_config(const RunConfig& cfg);

// Canonical text with every key; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

ModelParams make_params(const RunConfig& cfg);
Grid make_grid(const RunConfig& cfg);
Field make_initial_field(const InitSpec& spec, const ModelParams& params,
                         const Grid& grid);
SimulationConfig make_sim_config(const RunConfig& cfg);

} // namespace preytaxis
