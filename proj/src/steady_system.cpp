#include "preytaxis/steady_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "preytaxis/errors.hpp"

namespace preytaxis {

const char* to_string(StateKind k) {
  switch (k) {
    case StateKind::trivial: return "trivial";
    case StateKind::prey_only: return "prey-only";
    case StateKind::predator_only: return "predator-only";
    case StateKind::coexistence: return "coexistence";
  }
  return "?";
}

namespace {

void require_pair(const Field& a, const Field& b) {
  if (!same_grid(a.grid, b.grid))
    throw precondition_error("invalid-argument", "u and v live on different grids");
}

} // namespace

std::pair<Field, Field> residual(const Field& u, const Field& v, double lambda,
                                 const ModelParams& params) {
  require_pair(u, v);
  const Grid& grid = u.grid;
  const int n = grid.n;
  const double h = grid.h, ih2 = 1.0 / (h * h);
  const auto& mot = params.motility;
  const auto& resp = params.response;

  Field r1(grid), r2(grid);
  const double d_bnd = mot.d(0.0), chi_bnd = mot.chi(0.0);
  for (int i = 0; i < n; ++i) {
    const double um = i > 0 ? u[i - 1] : 0.0, up = i < n - 1 ? u[i + 1] : 0.0;
    const double vm = i > 0 ? v[i - 1] : 0.0, vp = i < n - 1 ? v[i + 1] : 0.0;
    const double di = mot.d(v[i]);
    const double dm = i > 0 ? mot.d(vm) : d_bnd, dp = i < n - 1 ? mot.d(vp) : d_bnd;
    const double ci = mot.chi(v[i]);
    const double cm = i > 0 ? mot.chi(vm) : chi_bnd, cp = i < n - 1 ? mot.chi(vp) : chi_bnd;
    const double dL = 0.5 * (dm + di), dR = 0.5 * (di + dp);
    const double chiL = 0.5 * (cm + ci), chiR = 0.5 * (ci + cp);
    const double uL = 0.5 * (um + u[i]), uR = 0.5 * (u[i] + up);
    const double dvL = (v[i] - vm) / h, dvR = (vp - v[i]) / h;
    const double Fv = resp.F(v[i]);
    r1[i] = (dR * (u[i] - up) + dL * (u[i] - um)) * ih2 +
            (uR * chiR * dvR - uL * chiL * dvL) / h - lambda * u[i] + u[i] * u[i] -
            params.gamma * u[i] * Fv;
    r2[i] = params.D * (2.0 * v[i] - vp - vm) * ih2 - params.mu * v[i] + v[i] * v[i] +
            u[i] * Fv;
  }
  return {std::move(r1), std::move(r2)};
}

Field transform_w(const Field& u, const Field& v, const ModelContext& ctx) {
  require_pair(u, v);
  Field w(u.grid);
  for (int i = 0; i < u.size(); ++i) w[i] = std::exp(-ctx.g(v[i])) * u[i];
  return w;
}

Field untransform_w(const Field& w, const Field& v, const ModelContext& ctx) {
  require_pair(w, v);
  Field u(w.grid);
  for (int i = 0; i < w.size(); ++i) u[i] = std::exp(ctx.g(v[i])) * w[i];
  return u;
}

namespace {

// Transformed residual plus a roundoff-floor estimate for the stop test.
struct SysResidual {
  Field r1, r2;
  double norm = 0;
  double floor = 0;
};

SysResidual residual_w_impl(const Field& w, const Field& v, double lambda,
                            const ModelContext& ctx) {
  require_pair(w, v);
  const Grid& grid = w.grid;
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h * grid.h);
  const auto& mot = ctx.params.motility;
  const auto& resp = ctx.params.response;
  constexpr double eps = 2.3e-16;

  SysResidual out{Field(grid), Field(grid), 0, 0};
  std::vector<double> c(n), E(n);
  for (int i = 0; i < n; ++i) {
    E[i] = std::exp(ctx.g(v[i]));
    c[i] = mot.d(v[i]) * E[i];
  }
  const double c_bnd = mot.d(0.0);
  const double D = ctx.params.D, mu = ctx.params.mu, gamma = ctx.params.gamma;
  for (int i = 0; i < n; ++i) {
    const double wm = i > 0 ? w[i - 1] : 0.0, wp = i < n - 1 ? w[i + 1] : 0.0;
    const double vm = i > 0 ? v[i - 1] : 0.0, vp = i < n - 1 ? v[i + 1] : 0.0;
    const double cL = 0.5 * ((i > 0 ? c[i - 1] : c_bnd) + c[i]);
    const double cR = 0.5 * (c[i] + (i < n - 1 ? c[i + 1] : c_bnd));
    const double Fv = resp.F(v[i]);
    const double Ew = E[i] * w[i];
    const double diff1 = (cR * (w[i] - wp) + cL * (w[i] - wm)) * ih2;
    const double react1 = Ew * (lambda - Ew + gamma * Fv);
    out.r1[i] = diff1 - react1;
    const double diff2 = D * (2.0 * v[i] - vp - vm) * ih2;
    const double react2 = mu * v[i] - v[i] * v[i] - Ew * Fv;
    out.r2[i] = diff2 - react2;
    if (!std::isfinite(out.r1[i]) || !std::isfinite(out.r2[i]))
      out.norm = std::numeric_limits<double>::infinity();
    out.norm = std::max(out.norm, std::max(std::abs(out.r1[i]), std::abs(out.r2[i])));
    const double mag1 =
        (cR * (std::abs(w[i]) + std::abs(wp)) + cL * (std::abs(w[i]) + std::abs(wm))) * ih2 +
        std::abs(Ew) * (std::abs(lambda) + std::abs(Ew) + gamma * std::abs(Fv));
    const double mag2 = D * (2.0 * std::abs(v[i]) + std::abs(vp) + std::abs(vm)) * ih2 +
                        mu * std::abs(v[i]) + v[i] * v[i] + std::abs(Ew * Fv);
    out.floor = std::max(out.floor, eps * std::max(mag1, mag2));
  }
  return out;
}

} // namespace

std::pair<Field, Field> residual_w(const Field& w, const Field& v, double lambda,
                                   const ModelContext& ctx) {
  SysResidual r = residual_w_impl(w, v, lambda, ctx);
  return {std::move(r.r1), std::move(r.r2)};
}

std::pair<Field, Field> BlockJacobian::apply(const Field& x1, const Field& x2) const {
  Field r1 = a11.apply(x1) + a12.apply(x2);
  Field r2 = a22.apply(x2);
  for (int i = 0; i < r2.size(); ++i) r2[i] += a21[i] * x1[i];
  return {std::move(r1), std::move(r2)};
}

linalg::BandedMatrix BlockJacobian::banded() const {
  const int n = a11.size();
  linalg::BandedMatrix B(2 * n, 2, 3);
  for (int i = 0; i < n; ++i) {
    B.at(2 * i, 2 * i) = a11.diag[i];
    B.at(2 * i, 2 * i + 1) = a12.diag[i];
    B.at(2 * i + 1, 2 * i) = a21[i];
    B.at(2 * i + 1, 2 * i + 1) = a22.diag[i];
    if (i < n - 1) {
      B.at(2 * i, 2 * i + 2) = a11.super[i];
      B.at(2 * i, 2 * i + 3) = a12.super[i];
      B.at(2 * i + 1, 2 * i + 3) = a22.super[i];
      B.at(2 * i + 2, 2 * i) = a11.sub[i];
      B.at(2 * i + 2, 2 * i + 1) = a12.sub[i];
      B.at(2 * i + 3, 2 * i + 1) = a22.sub[i];
    }
  }
  return B;
}

BlockJacobian jacobian(const Field& u, const Field& v, double lambda,
                       const ModelParams& params) {
  require_pair(u, v);
  const Grid& grid = u.grid;
  const int n = grid.n;
  const double h = grid.h, ih2 = 1.0 / (h * h);
  const auto& mot = params.motility;
  const auto& resp = params.response;
  const double d_bnd = mot.d(0.0), chi_bnd = mot.chi(0.0);

  BlockJacobian J;
  J.a11.diag.assign(n, 0.0);
  J.a11.sub.assign(n - 1, 0.0);
  J.a11.super.assign(n - 1, 0.0);
  J.a12 = J.a11;
  J.a22 = J.a11;
  J.a21.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    const double um = i > 0 ? u[i - 1] : 0.0, up = i < n - 1 ? u[i + 1] : 0.0;
    const double vm = i > 0 ? v[i - 1] : 0.0, vp = i < n - 1 ? v[i + 1] : 0.0;
    const double di = mot.d(v[i]);
    const double dm = i > 0 ? mot.d(vm) : d_bnd, dp = i < n - 1 ? mot.d(vp) : d_bnd;
    const double ci = mot.chi(v[i]);
    const double cm = i > 0 ? mot.chi(vm) : chi_bnd, cp = i < n - 1 ? mot.chi(vp) : chi_bnd;
    const double dL = 0.5 * (dm + di), dR = 0.5 * (di + dp);
    const double chiL = 0.5 * (cm + ci), chiR = 0.5 * (ci + cp);
    const double uL = 0.5 * (um + u[i]), uR = 0.5 * (u[i] + up);
    const double dvL = (v[i] - vm) / h, dvR = (vp - v[i]) / h;
    const double Fv = resp.F(v[i]), dFv = resp.dF(v[i]);

    // first equation / first variable
    J.a11.diag[i] = (dR + dL) * ih2 + (chiR * dvR - chiL * dvL) / (2.0 * h) - lambda +
                    2.0 * u[i] - params.gamma * Fv;
    if (i < n - 1) J.a11.super[i] = -dR * ih2 + chiR * dvR / (2.0 * h);
    if (i > 0) J.a11.sub[i - 1] = -dL * ih2 - chiL * dvL / (2.0 * h);

    // first equation / v
    J.a12.diag[i] = ((u[i] - up) + (u[i] - um)) * 0.5 * mot.dd(v[i]) * ih2 +
                    (0.5 * mot.dchi(v[i]) * (uR * dvR - uL * dvL) -
                     (uR * chiR + uL * chiL) / h) /
                        h -
                    params.gamma * u[i] * dFv;
    if (i < n - 1)
      J.a12.super[i] = (u[i] - up) * 0.5 * mot.dd(vp) * ih2 +
                       uR * (0.5 * mot.dchi(vp) * dvR + chiR / h) / h;
    if (i > 0)
      J.a12.sub[i - 1] = (u[i] - um) * 0.5 * mot.dd(vm) * ih2 -
                         uL * (0.5 * mot.dchi(vm) * dvL - chiL / h) / h;

    // second equation
    J.a21[i] = Fv;
    J.a22.diag[i] = 2.0 * params.D * ih2 - params.mu + 2.0 * v[i] + u[i] * dFv;
    if (i < n - 1) J.a22.super[i] = -params.D * ih2;
    if (i > 0) J.a22.sub[i - 1] = -params.D * ih2;
  }
  return J;
}

BlockJacobian jacobian_w(const Field& w, const Field& v, double lambda,
                         const ModelContext& ctx) {
  require_pair(w, v);
  const Grid& grid = w.grid;
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h * grid.h);
  const auto& mot = ctx.params.motility;
  const auto& resp = ctx.params.response;
  const double gamma = ctx.params.gamma;

  std::vector<double> c(n), cprime(n), E(n), Eprime(n);
  for (int i = 0; i < n; ++i) {
    const double gi = ctx.g(v[i]);
    E[i] = std::exp(gi);
    const double di = mot.d(v[i]), chii = mot.chi(v[i]);
    c[i] = di * E[i];
    cprime[i] = (mot.dd(v[i]) + chii) * E[i];
    Eprime[i] = (chii / di) * E[i];
  }
  const double c_bnd = mot.d(0.0);

  BlockJacobian J;
  J.a11.diag.assign(n, 0.0);
  J.a11.sub.assign(n - 1, 0.0);
  J.a11.super.assign(n - 1, 0.0);
  J.a12 = J.a11;
  J.a22 = J.a11;
  J.a21.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    const double wm = i > 0 ? w[i - 1] : 0.0, wp = i < n - 1 ? w[i + 1] : 0.0;
    const double cL = 0.5 * ((i > 0 ? c[i - 1] : c_bnd) + c[i]);
    const double cR = 0.5 * (c[i] + (i < n - 1 ? c[i + 1] : c_bnd));
    const double Fv = resp.F(v[i]), dFv = resp.dF(v[i]);
    const double Ew = E[i] * w[i];

    J.a11.diag[i] = (cR + cL) * ih2 - E[i] * (lambda - 2.0 * Ew + gamma * Fv);
    if (i < n - 1) J.a11.super[i] = -cR * ih2;
    if (i > 0) J.a11.sub[i - 1] = -cL * ih2;

    J.a12.diag[i] = ((w[i] - wp) + (w[i] - wm)) * 0.5 * cprime[i] * ih2 -
                    Eprime[i] * w[i] * (lambda - Ew + gamma * Fv) -
                    Ew * (-Eprime[i] * w[i] + gamma * dFv);
    if (i < n - 1) J.a12.super[i] = (w[i] - wp) * 0.5 * cprime[i + 1] * ih2;
    if (i > 0) J.a12.sub[i - 1] = (w[i] - wm) * 0.5 * cprime[i - 1] * ih2;

    J.a21[i] = E[i] * Fv;
    J.a22.diag[i] = 2.0 * ctx.params.D * ih2 - ctx.params.mu + 2.0 * v[i] +
                    w[i] * (Eprime[i] * Fv + E[i] * dFv);
    if (i < n - 1) J.a22.super[i] = -ctx.params.D * ih2;
    if (i > 0) J.a22.sub[i - 1] = -ctx.params.D * ih2;
  }
  return J;
}

void enforce_box_bounds(const Field& u, const Field& v, double lambda,
                        const ModelContext& ctx) {
  const double slack = 1e-8;
  const double vbound = ctx.params.mu;
  const double ubound = std::exp(ctx.g_mu) *
                        (std::abs(lambda) + ctx.params.gamma * ctx.max_F_on_0_mu);
  if (v.max() > vbound * (1.0 + slack) + 1e-12)
    throw internal_error("box-bound", "positive state exceeds max v <= mu");
  if (u.max() > ubound * (1.0 + slack) + 1e-12)
    throw internal_error("box-bound",
                         "positive state exceeds max u <= e^{g(mu)} (|lambda| + gamma max F)");
}

SteadyState newton_solve(const Field& u0, const Field& v0, double lambda,
                         const ModelContext& ctx, const NewtonOptions& opts) {
  require_pair(u0, v0);
  const Grid& grid = u0.grid;
  const int n = grid.n;

  Field w = transform_w(u0, v0, ctx);
  Field v = v0;
  SysResidual res = residual_w_impl(w, v, lambda, ctx);
  std::vector<double> history{res.norm};
  if (!std::isfinite(res.norm))
    throw ConvergenceError("newton", "residual is not finite at the starting point",
                           history);
  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iter; ++iter) {
    if (res.norm <= std::max(opts.tol, 4.0 * res.floor)) {
      converged = true;
      break;
    }
    BlockJacobian J = jacobian_w(w, v, lambda, ctx);
    linalg::BandedMatrix B = J.banded();
    if (!B.factor())
      throw ConvergenceError("newton-singular", "steady-state Jacobian is singular", history);
    std::vector<double> rhs(2 * n);
    for (int i = 0; i < n; ++i) {
      rhs[2 * i] = res.r1[i];
      rhs[2 * i + 1] = res.r2[i];
    }
    const std::vector<double> step = B.solve(std::move(rhs));

    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      Field wc(grid), vc(grid);
      bool finite = true;
      for (int i = 0; i < n; ++i) {
        wc[i] = w[i] - alpha * step[2 * i];
        vc[i] = v[i] - alpha * step[2 * i + 1];
        finite = finite && std::isfinite(wc[i]) && std::isfinite(vc[i]);
      }
      if (!finite) {
        alpha *= 0.5;
        continue;
      }
      SysResidual rc = residual_w_impl(wc, vc, lambda, ctx);
      if (rc.norm < res.norm) {
        w = std::move(wc);
        v = std::move(vc);
        res = std::move(rc);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    history.push_back(res.norm);
    if (!accepted)
      throw ConvergenceError(
          "newton", "damped Newton stalled at residual " + std::to_string(res.norm), history);
  }
  if (!converged && res.norm > std::max(opts.tol, 4.0 * res.floor))
    throw ConvergenceError("newton", "Newton did not converge within the iteration budget",
                           history);

  SteadyState out;
  out.u = untransform_w(w, v, ctx);
  out.v = std::move(v);
  out.lambda = lambda;
  out.residual_norm = res.norm;
  out.newton_iterations = iter;

  const double thr = opts.class_threshold;
  const double su = out.u.sup_norm(), sv = out.v.sup_norm();
  if (su < thr && sv < thr) out.kind = StateKind::trivial;
  else if (su < thr) out.kind = StateKind::prey_only;
  else if (sv < thr) out.kind = StateKind::predator_only;
  else out.kind = StateKind::coexistence;
  out.positive = out.u.min() > 0.0 && out.v.min() > 0.0;

  if (opts.enforce_box && out.positive && out.kind == StateKind::coexistence)
    enforce_box_bounds(out.u, out.v, lambda, ctx);
  return out;
}

SteadyState newton_solve(const Field& u0, const Field& v0, double lambda,
                         const ModelParams& params, const NewtonOptions& opts) {
  ModelContext ctx(params, 1.25 * std::max({params.mu, v0.max(), 1.0}));
  return newton_solve(u0, v0, lambda, ctx, opts);
}

} // namespace preytaxis
