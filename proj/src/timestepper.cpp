#include "preytaxis/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "preytaxis/errors.hpp"

namespace preytaxis {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::trivial: return "trivial";
    case Regime::prey_only: return "prey-only";
    case Regime::predator_only: return "predator-only";
    case Regime::coexistence: return "coexistence";
    case Regime::undecided: return "undecided";
  }
  return "?";
}

Regime classify_regime(const Field& u, const Field& v, double threshold) {
  const bool u_on = u.sup_norm() >= threshold;
  const bool v_on = v.sup_norm() >= threshold;
  if (u_on && v_on) return Regime::coexistence;
  if (u_on) return Regime::predator_only;
  if (v_on) return Regime::prey_only;
  return Regime::trivial;
}

namespace {

constexpr double clamp_tol = 1e-12;

struct StepWorkspace {
  std::vector<double> d_n, chi_n, F_n, FF_n; // nodal coefficient samples
  std::vector<double> vel, flux;             // n+1 faces
  std::vector<double> ustar, vstar, sub, diag, super, scratch;

  explicit StepWorkspace(int n)
      : d_n(n), chi_n(n), F_n(n), FF_n(n), vel(n + 1), flux(n + 1), ustar(n), vstar(n),
        sub(n > 0 ? n - 1 : 0), diag(n), super(n > 0 ? n - 1 : 0), scratch(2 * n) {}
};

// Fills nodal samples and upwind face velocities; returns the smallest
// positivity coefficient of the explicit part (negative = reject the step).
double explicit_margin(const Field& u, const Field& v, const SimulationConfig& cfg,
                       double dt, StepWorkspace& ws, double v_bound) {
  const ModelParams& p = cfg.params;
  const Grid& g = u.grid;
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    ws.d_n[i] = p.motility.d(v[i]);
    ws.chi_n[i] = p.motility.chi(v[i]);
    ws.F_n[i] = p.response.F(v[i]);
    ws.FF_n[i] = p.response.FF(v[i]);
  }
  const double chi0 = p.motility.chi(0.0);
  for (int f = 0; f <= n; ++f) {
    const double vl = f == 0 ? 0.0 : v[f - 1];
    const double vr = f == n ? 0.0 : v[f];
    const double chil = f == 0 ? chi0 : ws.chi_n[f - 1];
    const double chir = f == n ? chi0 : ws.chi_n[f];
    ws.vel[f] = 0.5 * (chil + chir) * (vr - vl) / g.h;
  }

  double margin = 1.0;
  for (int i = 0; i < n; ++i) {
    const double outflow =
        std::max(ws.vel[i + 1], 0.0) - std::min(ws.vel[i], 0.0);
    double cu = 1.0 - dt / g.h * outflow;
    double cv = 1.0;
    if (cfg.reaction_on) {
      cu += dt * (p.lambda - u[i] + p.gamma * ws.F_n[i]);
      cv += dt * (p.mu - v[i] - u[i] * ws.FF_n[i]);
    }
    margin = std::min(margin, std::min(cu, cv));
  }
  if (cfg.reaction_on) {
    // monotonicity of s -> s (1 + dt (mu - s)) on [0, v_bound] keeps the
    // comparison bound sup v <= max(sup v0, mu) valid step by step
    margin = std::min(margin, 1.0 + dt * (p.mu - 2.0 * v_bound));
  }
  return margin;
}

// One IMEX step; returns false without touching the state when the
// positivity margin is negative.
bool step_core(Field& u, Field& v, const SimulationConfig& cfg, double dt,
               StepWorkspace& ws, StepDiagnostics& diag, double v_bound) {
  const ModelParams& p = cfg.params;
  const Grid& g = u.grid;
  const int n = g.n;

  diag.cfl_margin = explicit_margin(u, v, cfg, dt, ws, v_bound);
  if (diag.cfl_margin < 0.0) return false;

  for (int f = 0; f <= n; ++f) {
    const double up = ws.vel[f] > 0.0 ? (f == 0 ? 0.0 : u[f - 1])
                                      : (f == n ? 0.0 : u[f]);
    ws.flux[f] = ws.vel[f] * up;
  }
  for (int i = 0; i < n; ++i) {
    double s = u[i] - dt / g.h * (ws.flux[i + 1] - ws.flux[i]);
    double t = v[i];
    if (cfg.reaction_on) {
      s += dt * u[i] * (p.lambda - u[i] + p.gamma * ws.F_n[i]);
      t += dt * v[i] * (p.mu - v[i]) - dt * u[i] * ws.F_n[i];
    }
    ws.ustar[i] = s;
    ws.vstar[i] = t;
  }

  // implicit u diffusion: (I + dt A(d(v))) u_new = u*
  const double d0 = p.motility.d(0.0);
  const double inv_h2 = 1.0 / (g.h * g.h);
  for (int i = 0; i < n; ++i) {
    const double pl = 0.5 * ((i == 0 ? d0 : ws.d_n[i - 1]) + ws.d_n[i]);
    const double pr = 0.5 * (ws.d_n[i] + (i == n - 1 ? d0 : ws.d_n[i + 1]));
    ws.diag[i] = 1.0 + dt * (pl + pr) * inv_h2;
    if (i + 1 < n) ws.super[i] = -dt * pr * inv_h2;
    if (i > 0) ws.sub[i - 1] = -dt * pl * inv_h2;
  }
  linalg::solve_tridiagonal_inplace(ws.sub.data(), ws.diag.data(), ws.super.data(),
                                    ws.ustar.data(), n, ws.scratch.data());

  const double pl0 = 0.5 * (d0 + ws.d_n[0]);
  const double prn = 0.5 * (ws.d_n[n - 1] + d0);
  diag.u_boundary_flux =
      dt * ((ws.flux[n] - ws.flux[0]) + (pl0 * ws.ustar[0] + prn * ws.ustar[n - 1]) / g.h);

  // implicit v diffusion: (I + dt A(D)) v_new = v*
  const double off = -dt * p.D * inv_h2;
  for (int i = 0; i < n; ++i) ws.diag[i] = 1.0 - 2.0 * off;
  for (int i = 0; i + 1 < n; ++i) {
    ws.super[i] = off;
    ws.sub[i] = off;
  }
  linalg::solve_tridiagonal_inplace(ws.sub.data(), ws.diag.data(), ws.super.data(),
                                    ws.vstar.data(), n, ws.scratch.data());

  diag.clamped = 0.0;
  for (int i = 0; i < n; ++i) {
    double& un = ws.ustar[i];
    double& vn = ws.vstar[i];
    if (un < 0.0) {
      if (-un >= clamp_tol)
        throw internal_error("positivity", "negative density beyond the clamp tolerance");
      diag.clamped = std::max(diag.clamped, -un);
      un = 0.0;
    }
    if (vn < 0.0) {
      if (-vn >= clamp_tol)
        throw internal_error("positivity", "negative density beyond the clamp tolerance");
      diag.clamped = std::max(diag.clamped, -vn);
      vn = 0.0;
    }
    u[i] = un;
    v[i] = vn;
  }
  return true;
}

void validate_config(const SimulationConfig& cfg) {
  validate_params(cfg.params);
  if (!(cfg.dt > 0.0) || !(cfg.T >= cfg.dt))
    throw precondition_error("invalid-argument", "need dt > 0 and T >= dt");
  if (!same_grid(cfg.u0.grid, cfg.grid) || !same_grid(cfg.v0.grid, cfg.grid))
    throw precondition_error("invalid-argument", "initial data must live on the run grid");
  for (int i = 0; i < cfg.grid.n; ++i)
    if (cfg.u0[i] < 0.0 || cfg.v0[i] < 0.0)
      throw precondition_error("invalid-argument", "initial data must be nonnegative");
}

// Shared driver; stops early when the time-derivative estimate drops below
// deriv_tol (pass a negative tolerance to march to T unconditionally).
Trajectory march(const SimulationConfig& cfg, double deriv_tol, bool& converged,
                 double& deriv_estimate) {
  validate_config(cfg);
  Trajectory out;
  Field u = cfg.u0, v = cfg.v0;
  Field u_prev = u, v_prev = v;
  StepWorkspace ws(cfg.grid.n);
  StepDiagnostics diag;

  out.sup_v_bound = std::max(cfg.v0.max(), cfg.params.mu);
  out.sup_v_observed = cfg.v0.max();
  out.times.push_back(0.0);
  out.u_snapshots.push_back(u);
  out.v_snapshots.push_back(v);

  double t = 0.0;
  double dt = cfg.dt;
  converged = false;
  deriv_estimate = std::numeric_limits<double>::infinity();

  while (cfg.T - t > 1e-9 * cfg.T) {
    const double step_dt = std::min(dt, cfg.T - t);
    if (!step_core(u, v, cfg, step_dt, ws, diag, out.sup_v_bound)) {
      if (!cfg.auto_dt)
        throw ConvergenceError("unstable-step",
                               "explicit taxis/reaction positivity restriction "
                               "exceeded; reduce dt");
      if (out.dt_halvings >= cfg.max_dt_halvings)
        throw ConvergenceError("unstable-step",
                               "positivity restriction still violated after the "
                               "maximum number of dt halvings");
      dt *= 0.5;
      ++out.dt_halvings;
      continue;
    }
    t += step_dt;
    ++out.steps;
    out.max_clamped = std::max(out.max_clamped, diag.clamped);
    out.sup_v_observed = std::max(out.sup_v_observed, v.max());
    if (out.sup_v_observed > out.sup_v_bound * (1.0 + 1e-6))
      throw internal_error("v-bound", "prey density exceeded the comparison bound");

    if (cfg.snapshot_stride > 0 && out.steps % cfg.snapshot_stride == 0 &&
        cfg.T - t > 1e-9 * cfg.T) {
      out.times.push_back(t);
      out.u_snapshots.push_back(u);
      out.v_snapshots.push_back(v);
    }
    if (deriv_tol >= 0.0) {
      double du = 0.0;
      for (int i = 0; i < cfg.grid.n; ++i) {
        du = std::max(du, std::abs(u[i] - u_prev[i]));
        du = std::max(du, std::abs(v[i] - v_prev[i]));
      }
      deriv_estimate = du / step_dt;
      if (deriv_estimate < deriv_tol) {
        converged = true;
        break;
      }
      u_prev = u;
      v_prev = v;
    }
  }

  out.final_time = t;
  out.dt_final = dt;
  out.times.push_back(t);
  out.u_snapshots.push_back(u);
  out.v_snapshots.push_back(v);
  out.final_u = std::move(u);
  out.final_v = std::move(v);
  out.regime = classify_regime(out.final_u, out.final_v, cfg.regime_threshold);
  return out;
}

} // namespace

std::pair<Field, Field> imex_step(const Field& u, const Field& v,
                                  const SimulationConfig& config, double dt,
                                  StepDiagnostics* diag) {
  validate_params(config.params);
  if (!(dt > 0.0)) throw precondition_error("invalid-argument", "need dt > 0");
  if (!same_grid(u.grid, v.grid))
    throw precondition_error("invalid-argument", "state components on different grids");
  Field un = u, vn = v;
  StepWorkspace ws(u.grid.n);
  StepDiagnostics local;
  const double v_bound = std::max(v.max(), config.params.mu);
  if (!step_core(un, vn, config, dt, ws, local, v_bound))
    throw ConvergenceError("unstable-step",
                           "explicit taxis/reaction positivity restriction exceeded; "
                           "reduce dt");
  if (diag) *diag = local;
  return {std::move(un), std::move(vn)};
}

double cfl_step_margin(const Field& u, const Field& v, const SimulationConfig& config,
                       double dt) {
  StepWorkspace ws(u.grid.n);
  return explicit_margin(u, v, config, dt, ws,
                         std::max(v.max(), config.params.mu));
}

Trajectory simulate(const SimulationConfig& config) {
  bool converged = false;
  double deriv = 0.0;
  return march(config, -1.0, converged, deriv);
}

SteadyLimit steady_limit(const SimulationConfig& config, double tolerance) {
  SteadyLimit out;
  out.trajectory = march(config, tolerance, out.converged, out.derivative_estimate);
  if (!out.converged) return out;
  out.state = newton_solve(out.trajectory.final_u, out.trajectory.final_v,
                           config.params.lambda, config.params);
  return out;
}

} // namespace preytaxis
