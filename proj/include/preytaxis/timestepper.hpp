#pragma once

// IMEX integrator for the parabolic taxis system
//
//   u_t = ( d(v) u' - u chi(v) v' )' + u ( lambda - u + gamma F(v) )
//   v_t = D v'' + v ( mu - v ) - u F(v)
//
// with homogeneous Dirichlet boundaries: diffusion implicit (coefficients
// frozen at the current step, tridiagonal solves), taxis explicit with
// first-order upwinding on the face velocity chi(v) v', reactions explicit.
// Positivity is preserved by the upwind flux form plus an explicit CFL-style
// positivity check each step; roundoff negatives are clamped at zero.

#include <utility>
#include <vector>

#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/steady_system.hpp"

namespace preytaxis {

enum class Regime { trivial, prey_only, predator_only, coexistence, undecided };

const char* to_string(Regime r);

struct SimulationConfig {
  ModelParams params;
  Grid grid;
  double dt = 1e-3;
  double T = 500.0;
  Field u0, v0;           // nonnegative nodal initial data
  int snapshot_stride = 0; // every k-th step is stored; 0 keeps only first/last
  double regime_threshold = 1e-2;
  bool reaction_on = true;
  bool auto_dt = true; // halve dt on a positivity-CFL violation instead of failing
  int max_dt_halvings = 40;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Field> u_snapshots, v_snapshots;
  Field final_u, final_v;
  double final_time = 0;
  Regime regime = Regime::undecided;
  long long steps = 0;
  int dt_halvings = 0;
  double dt_final = 0;
  double sup_v_bound = 0;    // max(sup v0, mu), the monitored comparison bound
  double sup_v_observed = 0; // largest sup v seen during the run
  double max_clamped = 0;    // largest roundoff negative clamped to zero
};

// Step diagnostics for conservation tests: net outward boundary flux of the
// first component over the step (advective + diffusive, time dt already
// applied), the smallest positivity coefficient encountered, and the largest
// clamped negative.
struct StepDiagnostics {
  double u_boundary_flux = 0;
  double cfl_margin = 0;
  double clamped = 0;
};

// One IMEX step of size dt from (u, v). Throws unstable-step when the
// positivity condition fails (callers implementing auto-halving should check
// cfl_step_margin first) and positivity when a negative value beyond the
// 1e-12 clamp tolerance appears.
std::pair<Field, Field> imex_step(const Field& u, const Field& v,
                                  const SimulationConfig& config, double dt,
                                  StepDiagnostics* diag = nullptr);

// Smallest positivity coefficient of the explicit part at (u, v) for step dt;
// negative means the step would be rejected.
double cfl_step_margin(const Field& u, const Field& v, const SimulationConfig& config,
                       double dt);

// Sup-norm regime thresholds applied to a final state.
Regime classify_regime(const Field& u, const Field& v, double threshold);

Trajectory simulate(const SimulationConfig& config);

struct SteadyLimit {
  bool converged = false; // time-derivative estimate dropped below tolerance
  SteadyState state;      // Newton-polished when converged
  Trajectory trajectory;
  double derivative_estimate = 0;
};

// Marches until the time-derivative estimate ||(x_new - x_old)/dt||_inf is
// below tolerance or T is exhausted; on convergence hands the state to the
// steady-state Newton for polishing.
SteadyLimit steady_limit(const SimulationConfig& config, double tolerance = 1e-8);

} // namespace preytaxis
