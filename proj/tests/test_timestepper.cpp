#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "preytaxis/bifurcation.hpp"
#include "preytaxis/continuation.hpp"
#include "preytaxis/errors.hpp"
#include "preytaxis/scalar_solvers.hpp"
#include "preytaxis/timestepper.hpp"

using namespace preytaxis;

namespace {

Field sine_init(const Grid& g) {
  return map_field(g, [](double x) { return 0.1 + 0.1 * std::sin(5.0 * x); });
}

SimulationConfig figure_config(const ModelParams& params, int n, double T) {
  SimulationConfig cfg;
  cfg.params = params;
  cfg.grid = build_grid(4.0, n);
  cfg.dt = 1e-3;
  cfg.T = T;
  cfg.u0 = sine_init(cfg.grid);
  cfg.v0 = sine_init(cfg.grid);
  return cfg;
}

} // namespace

TEST_SUITE("timestepper") {

TEST_CASE("prey mass changes only through the boundary flux") {
  ModelParams params = oracles::figure2_params();
  params.lambda = 0.0;
  params.gamma = 0.0;
  SimulationConfig cfg = figure_config(params, 64, 1.0);
  cfg.reaction_on = false;

  Field u = cfg.u0, v = cfg.v0;
  for (int step = 0; step < 200; ++step) {
    double mass_before = integrate(u);
    StepDiagnostics diag;
    auto [un, vn] = imex_step(u, v, cfg, cfg.dt, &diag);
    double mass_after = integrate(un);
    CHECK(std::abs(mass_after - mass_before + diag.u_boundary_flux) <=
          1e-13 * std::max(1.0, mass_before));
    u = un;
    v = vn;
  }
}

TEST_CASE("solutions stay nonnegative and essentially unclamped") {
  ModelParams params = oracles::figure2_params();
  params.lambda = 5.0;
  SimulationConfig cfg = figure_config(params, 96, 2.0);
  cfg.snapshot_stride = 200;
  Trajectory t = simulate(cfg);
  CHECK(t.max_clamped < 1e-12);
  for (const Field& u : t.u_snapshots) CHECK(u.min() >= 0.0);
  for (const Field& v : t.v_snapshots) CHECK(v.min() >= 0.0);
  CHECK(t.final_u.min() >= 0.0);
  CHECK(t.final_v.min() >= 0.0);
}

TEST_CASE("the prey comparison bound is monitored and honored") {
  ModelParams params = oracles::figure2_params();
  SimulationConfig high = figure_config(params, 64, 5.0);
  high.v0 = Field(high.grid, 3.0); // above mu = 2
  Trajectory t = simulate(high);
  CHECK(t.sup_v_bound == doctest::Approx(3.0));
  CHECK(t.sup_v_observed <= 3.0 * (1.0 + 1e-6));
  CHECK(t.final_v.max() < 3.0);

  SimulationConfig low = figure_config(params, 64, 5.0);
  Trajectory s = simulate(low);
  CHECK(s.sup_v_bound == doctest::Approx(params.mu));
  CHECK(s.sup_v_observed <= params.mu * (1.0 + 1e-6));
}

TEST_CASE("unstable steps are halved automatically or rejected loudly") {
  ModelParams params = oracles::figure2_params();
  params.lambda = 5.0;
  SimulationConfig cfg = figure_config(params, 64, 3.0);
  cfg.dt = 1.0; // violates the reaction monotonicity bound at mu = 2

  CHECK(cfl_step_margin(cfg.u0, cfg.v0, cfg, 1.0) < 0.0);
  CHECK(cfl_step_margin(cfg.u0, cfg.v0, cfg, 1e-3) > 0.0);

  Trajectory t = simulate(cfg);
  CHECK(t.dt_halvings >= 1);
  CHECK(t.dt_final < 1.0);

  cfg.auto_dt = false;
  bool threw = false;
  try {
    simulate(cfg);
  } catch (const ConvergenceError& e) {
    threw = true;
    CHECK(e.kind() == "unstable-step");
  }
  CHECK(threw);

  CHECK_THROWS_AS(imex_step(cfg.u0, cfg.v0, cfg, 1.0), Error);
}

TEST_CASE("zero initial data stays on the trivial state") {
  ModelParams params = oracles::figure2_params();
  SimulationConfig cfg = figure_config(params, 48, 0.5);
  cfg.u0 = Field(cfg.grid);
  cfg.v0 = Field(cfg.grid);
  Trajectory t = simulate(cfg);
  CHECK(t.regime == Regime::trivial);
  CHECK(t.final_u.sup_norm() == 0.0);
  CHECK(t.final_v.sup_norm() == 0.0);
}

TEST_CASE("negative initial data is rejected") {
  ModelParams params = oracles::figure2_params();
  SimulationConfig cfg = figure_config(params, 48, 0.5);
  cfg.u0 = Field(cfg.grid, -0.5);
  bool threw = false;
  try {
    simulate(cfg);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.error_class() == ErrorClass::precondition);
  }
  CHECK(threw);
}

TEST_CASE("regime thresholds read a final state") {
  Grid g = build_grid(4.0, 16);
  Field big(g, 0.5), tiny(g, 1e-5);
  CHECK(classify_regime(big, tiny, 1e-2) == Regime::predator_only);
  CHECK(classify_regime(tiny, big, 1e-2) == Regime::prey_only);
  CHECK(classify_regime(big, big, 1e-2) == Regime::coexistence);
  CHECK(classify_regime(tiny, tiny, 1e-2) == Regime::trivial);
}

TEST_CASE("weak prey growth settles on the prey-only state") {
  ModelParams params = oracles::figure2_params();
  params.lambda = -1.0;
  SimulationConfig cfg = figure_config(params, 96, 200.0);
  SteadyLimit lim = steady_limit(cfg, 1e-8);
  REQUIRE(lim.converged);
  CHECK(lim.state.kind == StateKind::prey_only);
  CHECK(lim.trajectory.regime == Regime::prey_only);

  SemitrivialStates s = semitrivial_states(params, cfg.grid);
  REQUIRE(s.prey_only.has_value());
  CHECK(sup_distance(lim.state.v, s.prey_only->theta) <= 1e-6);
  CHECK(lim.trajectory.final_u.sup_norm() < 1e-2);
}

TEST_CASE("moderate prey growth settles on a coexistence state") {
  ModelParams params = oracles::figure2_params();
  SimulationConfig cfg = figure_config(params, 96, 300.0);
  SteadyLimit lim = steady_limit(cfg, 1e-8);
  REQUIRE(lim.converged);
  CHECK(lim.state.kind == StateKind::coexistence);
  CHECK(lim.state.positive);
  CHECK(lim.state.residual_norm <= 1e-9);
  CHECK(lim.state.v.max() <= params.mu * (1.0 + 1e-8));

  // The upwind march has its own fixed point within O(h) of the centered
  // steady root; the polish bridges that gap.
  CHECK(sup_distance(lim.state.u, lim.trajectory.final_u) <= 0.2 * cfg.grid.h);
  CHECK(sup_distance(lim.state.v, lim.trajectory.final_v) <= 0.2 * cfg.grid.h);

  // Cross-check: the polished limit agrees with a continuation branch point
  // corrected to the same growth rate.
  BifurcationBundle b = lambda_mu_bundle(params, cfg.grid);
  Branch br = branch_from_prey_bifurcation(b, params, cfg.grid);
  const BranchPoint* nearest = &br.points.front();
  for (const BranchPoint& p : br.points)
    if (std::abs(p.lambda - params.lambda) < std::abs(nearest->lambda - params.lambda))
      nearest = &p;
  SteadyState ref = newton_solve(nearest->u, nearest->v, params.lambda, params);
  REQUIRE(ref.kind == StateKind::coexistence);
  CHECK(sup_distance(lim.state.u, ref.u) <= 1e-4);
  CHECK(sup_distance(lim.state.v, ref.v) <= 1e-4);
}

TEST_CASE("snapshots bracket the run") {
  ModelParams params = oracles::figure2_params();
  SimulationConfig cfg = figure_config(params, 48, 0.01);
  cfg.snapshot_stride = 2;
  Trajectory t = simulate(cfg);
  REQUIRE(t.times.size() >= 3);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(t.times.size() == t.u_snapshots.size());
  CHECK(t.times.size() == t.v_snapshots.size());
  CHECK(t.steps == 10);
}

} // TEST_SUITE
