#include "preytaxis/continuation.hpp"

#include <cmath>
#include <utility>

#include "preytaxis/errors.hpp"

namespace preytaxis {

const char* to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::hits_gamma_u: return "hits-Gamma-u";
    case EndpointClass::hits_gamma_v: return "hits-Gamma-v";
    case EndpointClass::reached_lambda_cap: return "reached-lambda-cap";
    case EndpointClass::step_failure: return "step-failure";
    case EndpointClass::step_budget: return "step-budget";
  }
  return "?";
}

namespace {

// Continuation state (w, v, lambda) with the weighted inner product
//   <y, z> = sum_i h E_i y.w_i z.w_i + sum_i h y.v_i z.v_i + y.lambda z.lambda,
// E frozen at the bifurcation point so the w-block weight matches the
// eigenfunction normalization.
struct YState {
  Field w, v;
  double lambda = 0;
};

struct WeightedSpace {
  std::vector<double> wu; // h * E_omega per node
  double wv = 0;          // h
};

double dot_W(const WeightedSpace& W, const YState& a, const YState& b) {
  double s = 0;
  const int n = a.w.size();
  for (int i = 0; i < n; ++i) s += W.wu[i] * a.w[i] * b.w[i];
  for (int i = 0; i < n; ++i) s += W.wv * a.v[i] * b.v[i];
  return s + a.lambda * b.lambda;
}

YState axpy(const YState& base, double s, const YState& dir) {
  YState y;
  y.w = base.w + s * dir.w;
  y.v = base.v + s * dir.v;
  y.lambda = base.lambda + s * dir.lambda;
  return y;
}

YState difference(const YState& a, const YState& b) {
  YState y;
  y.w = a.w - b.w;
  y.v = a.v - b.v;
  y.lambda = a.lambda - b.lambda;
  return y;
}

void normalize_W(const WeightedSpace& W, YState& t) {
  const double nrm = std::sqrt(dot_W(W, t, t));
  if (!(nrm > 0)) throw internal_error("tangent-degenerate", "zero continuation tangent");
  const double inv = 1.0 / nrm;
  for (double& x : t.w.values) x *= inv;
  for (double& x : t.v.values) x *= inv;
  t.lambda *= inv;
}

bool nodally_positive(const YState& y) {
  const int n = y.w.size();
  for (int i = 0; i < n; ++i)
    if (!(y.w[i] > 0.0) || !(y.v[i] > 0.0)) return false;
  return true;
}

bool all_finite(const YState& y) {
  for (double x : y.w.values)
    if (!std::isfinite(x)) return false;
  for (double x : y.v.values)
    if (!std::isfinite(x)) return false;
  return std::isfinite(y.lambda);
}

struct CorrectorResult {
  bool ok = false;
  YState y;
  double residual = 0;
  int iterations = 0;
};

// d(first residual)/d(lambda): -e^{g(v_i)} w_i, interleaved with zeros.
std::vector<double> lambda_column(const YState& y, const ModelContext& ctx) {
  const Field gv = ctx.g(y.v);
  const int n = y.w.size();
  std::vector<double> col(2 * static_cast<size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) col[2 * static_cast<size_t>(i)] = -std::exp(gv[i]) * y.w[i];
  return col;
}

// Solves the bordered system [J Fl; nrow nlam] [dy; dl] = [rhs; rN] densely.
bool dense_bordered_solve(const BlockJacobian& J, const std::vector<double>& Fl,
                          const std::vector<double>& nrow, double nlam,
                          const std::vector<double>& rhs2n, double rN,
                          std::vector<double>& out) {
  const int n = J.a11.size();
  const int m = 2 * n + 1;
  std::vector<double> a(static_cast<size_t>(m) * m, 0.0);
  auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * m + j]; };
  for (int i = 0; i < n; ++i) {
    const int ru = 2 * i, rv = 2 * i + 1;
    A(ru, 2 * i) = J.a11.diag[i];
    if (i > 0) A(ru, 2 * (i - 1)) = J.a11.sub[i - 1];
    if (i + 1 < n) A(ru, 2 * (i + 1)) = J.a11.super[i];
    A(ru, 2 * i + 1) = J.a12.diag[i];
    if (i > 0) A(ru, 2 * (i - 1) + 1) = J.a12.sub[i - 1];
    if (i + 1 < n) A(ru, 2 * (i + 1) + 1) = J.a12.super[i];
    A(ru, 2 * n) = Fl[2 * static_cast<size_t>(i)];
    A(rv, 2 * i) = J.a21[i];
    A(rv, 2 * i + 1) = J.a22.diag[i];
    if (i > 0) A(rv, 2 * (i - 1) + 1) = J.a22.sub[i - 1];
    if (i + 1 < n) A(rv, 2 * (i + 1) + 1) = J.a22.super[i];
  }
  for (int j = 0; j < 2 * n; ++j) A(2 * n, j) = nrow[j];
  A(2 * n, 2 * n) = nlam;
  out = rhs2n;
  out.push_back(rN);
  return linalg::dense_solve(std::move(a), m, out);
}

// Newton on the extended system: steady residual in (w, v) plus the tangent
// condition <y - base, t> = ds. Banded Schur solve with dense fallback.
CorrectorResult correct(YState y, const YState& base, const YState& t, double ds,
                        const ModelContext& ctx, const WeightedSpace& W,
                        const ContinuationControls& c) {
  CorrectorResult out;
  const int n = y.w.size();
  std::vector<double> nrow(2 * static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    nrow[2 * static_cast<size_t>(i)] = W.wu[i] * t.w[i];
    nrow[2 * static_cast<size_t>(i) + 1] = W.wv * t.v[i];
  }
  const double nlam = t.lambda;

  for (int iter = 1; iter <= c.max_corrector_iterations; ++iter) {
    if (!all_finite(y)) return out;
    auto [r1, r2] = residual_w(y.w, y.v, y.lambda, ctx);
    const double N = dot_W(W, difference(y, base), t) - ds;
    const double res = std::max(r1.sup_norm(), r2.sup_norm());
    if (res <= c.corrector_tol && std::abs(N) <= 1e-10 * std::max(1.0, std::abs(ds))) {
      out.ok = true;
      out.y = std::move(y);
      out.residual = res;
      out.iterations = iter - 1;
      return out;
    }

    const BlockJacobian J = jacobian_w(y.w, y.v, y.lambda, ctx);
    const std::vector<double> Fl = lambda_column(y, ctx);
    std::vector<double> rhs(2 * static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      rhs[2 * static_cast<size_t>(i)] = -r1[i];
      rhs[2 * static_cast<size_t>(i) + 1] = -r2[i];
    }

    std::vector<double> delta; // 2n + 1 entries, interleaved then lambda
    bool solved = false;
    linalg::BandedMatrix B = J.banded();
    if (B.factor()) {
      std::vector<double> a = B.solve(rhs);
      std::vector<double> b = B.solve(Fl);
      double na = 0, nb = 0;
      for (size_t k = 0; k < nrow.size(); ++k) {
        na += nrow[k] * a[k];
        nb += nrow[k] * b[k];
      }
      const double denom = nlam - nb;
      if (std::isfinite(denom) && std::abs(denom) > 1e-14) {
        const double dl = (-N - na) / denom;
        delta.resize(2 * static_cast<size_t>(n) + 1);
        bool finite = std::isfinite(dl);
        for (int k = 0; k < 2 * n && finite; ++k) {
          delta[k] = a[k] - dl * b[k];
          finite = std::isfinite(delta[k]);
        }
        delta[2 * static_cast<size_t>(n)] = dl;
        solved = finite;
      }
    }
    if (!solved) {
      if (!dense_bordered_solve(J, Fl, nrow, nlam, rhs, -N, delta)) return out;
      for (double x : delta)
        if (!std::isfinite(x)) return out;
    }

    for (int i = 0; i < n; ++i) {
      y.w[i] += delta[2 * static_cast<size_t>(i)];
      y.v[i] += delta[2 * static_cast<size_t>(i) + 1];
    }
    y.lambda += delta[2 * static_cast<size_t>(n)];
  }
  return out;
}

double weighted_amplitude(const YState& y, const Field& Phi, const WeightedSpace& W) {
  double s = 0;
  for (int i = 0; i < y.w.size(); ++i) s += W.wu[i] * Phi[i] * y.w[i];
  return s;
}

BranchPoint make_point(const YState& y, const ModelContext& ctx, const Field& Phi,
                       const WeightedSpace& W, double arclength, double residual) {
  BranchPoint p;
  p.lambda = y.lambda;
  p.v = y.v;
  p.u = untransform_w(y.w, y.v, ctx);
  p.arclength = arclength;
  p.amplitude = weighted_amplitude(y, Phi, W);
  p.residual = residual;
  p.positive = nodally_positive(y);
  return p;
}

} // namespace

int count_lambda_folds(const std::vector<BranchPoint>& points) {
  int folds = 0;
  int last_sign = 0;
  for (size_t k = 1; k < points.size(); ++k) {
    const double d = points[k].lambda - points[k - 1].lambda;
    if (std::abs(d) <= 1e-12) continue;
    const int s = d > 0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++folds;
    last_sign = s;
  }
  return folds;
}

std::optional<EndpointClass> classify_endpoint(const std::vector<BranchPoint>& tail,
                                               const ModelParams& params,
                                               const Grid& grid,
                                               const EndpointThresholds& thresholds) {
  if (tail.size() < 2)
    throw precondition_error("invalid-argument",
                             "endpoint classification needs at least two trailing points");
  const BranchPoint& last = tail.back();
  if (last.lambda > thresholds.lambda_cap) return EndpointClass::reached_lambda_cap;

  ModelParams p = params;
  p.lambda = last.lambda;
  const SemitrivialStates st = semitrivial_states(p, grid);
  if (last.u.sup_norm() < thresholds.semitrivial_sup && st.prey_only &&
      sup_distance(last.v, st.prey_only->theta) < thresholds.semitrivial_distance)
    return EndpointClass::hits_gamma_v;
  if (last.v.sup_norm() < thresholds.semitrivial_sup && st.predator_only &&
      sup_distance(last.u, st.predator_only->theta) < thresholds.semitrivial_distance)
    return EndpointClass::hits_gamma_u;
  return std::nullopt;
}

Branch branch_from_prey_bifurcation(const BifurcationBundle& bundle,
                                    const ModelParams& params, const Grid& grid,
                                    const ContinuationControls& controls) {
  validate_params(params);
  ModelContext ctx(params, 1.25 * std::max(params.mu, 1.0));

  WeightedSpace W;
  W.wu.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) W.wu[i] = grid.h * bundle.E[i];
  W.wv = grid.h;

  Branch branch;
  branch.origin_lambda = bundle.lambda_mu;

  YState base;
  base.w = Field(grid, 0.0);
  base.v = bundle.omega;
  base.lambda = bundle.lambda_mu;

  YState t;
  t.w = bundle.Phi;
  t.v = bundle.psi;
  t.lambda = bundle.lambda_prime0;
  normalize_W(W, t);

  auto finish = [&](EndpointClass cls, double lambda_end, const Field& tu, const Field& tv) {
    branch.endpoint = cls;
    branch.endpoint_lambda = lambda_end;
    branch.terminal_u = tu;
    branch.terminal_v = tv;
    branch.fold_count = count_lambda_folds(branch.points);
    if (!branch.points.empty()) {
      branch.lambda_min = branch.lambda_max = branch.points[0].lambda;
      for (const BranchPoint& p : branch.points) {
        branch.lambda_min = std::min(branch.lambda_min, p.lambda);
        branch.lambda_max = std::max(branch.lambda_max, p.lambda);
      }
    }
    return branch;
  };

  // First step: eigentriple predictor with halving.
  double ds = controls.initial_step;
  CorrectorResult first;
  for (int k = 0; k <= controls.max_first_step_halvings; ++k) {
    first = correct(axpy(base, ds, t), base, t, ds, ctx, W, controls);
    if (first.ok && nodally_positive(first.y)) break;
    first.ok = false;
    ds *= 0.5;
  }
  if (!first.ok)
    throw ConvergenceError(
        "bifurcation-start",
        "continuation could not leave the bifurcation point; the bifurcation "
        "value may be off or the grid too coarse");

  double arclength = ds;
  enforce_box_bounds(untransform_w(first.y.w, first.y.v, ctx), first.y.v, first.y.lambda,
                     ctx);
  branch.points.push_back(make_point(first.y, ctx, bundle.Phi, W, arclength, first.residual));

  YState prev = base;
  YState cur = first.y;
  int successes = 1;

  while (static_cast<int>(branch.points.size()) < controls.max_steps) {
    YState tan = difference(cur, prev);
    normalize_W(W, tan);

    CorrectorResult step;
    while (true) {
      step = correct(axpy(cur, ds, tan), cur, tan, ds, ctx, W, controls);
      if (step.ok && nodally_positive(step.y)) break;
      // A failed corrector or an iterate outside the positive cone both mean
      // the step overshot; shrink and retry from the same anchor. Because the
      // anchor advances on every accepted step, the predictor error shrinks
      // quadratically in the remaining distance while the gap to the
      // semitrivial branch shrinks only linearly, so the walk is not captured
      // by the semitrivial root as it closes in on a contact point.
      successes = 0;
      ds *= 0.5;
      if (ds < controls.min_step) {
        // Steps cannot shrink further. Bisect the short remaining stretch of
        // arclength from the last accepted point toward the last attempted
        // one; if the branch ends on a semitrivial state within the span, the
        // contact is resolved to near machine precision.
        const double span = 4.0 * controls.min_step;
        double lo = 0.0, hi = span;
        YState contact = cur;
        for (int iter = 0; iter < 200; ++iter) {
          if (contact.v.sup_norm() < controls.thresholds.semitrivial_sup) break;
          if (contact.w.sup_norm() < controls.thresholds.semitrivial_sup) break;
          if (hi - lo <= 1e-14 * std::max(1.0, span)) break;
          const double mid = 0.5 * (lo + hi);
          CorrectorResult trial =
              correct(axpy(cur, mid, tan), cur, tan, mid, ctx, W, controls);
          if (trial.ok && nodally_positive(trial.y)) {
            lo = mid;
            contact = trial.y;
          } else {
            hi = mid;
          }
        }

        const Field contact_u = untransform_w(contact.w, contact.v, ctx);
        ModelParams at_end = params;
        at_end.lambda = contact.lambda;
        const SemitrivialStates st = semitrivial_states(at_end, grid);
        EndpointClass cls = EndpointClass::step_failure;
        if (contact.v.sup_norm() < controls.thresholds.semitrivial_sup &&
            st.predator_only &&
            sup_distance(contact_u, st.predator_only->theta) <
                controls.thresholds.semitrivial_distance)
          cls = EndpointClass::hits_gamma_u;
        else if (contact_u.sup_norm() < controls.thresholds.semitrivial_sup &&
                 st.prey_only &&
                 sup_distance(contact.v, st.prey_only->theta) <
                     controls.thresholds.semitrivial_distance)
          cls = EndpointClass::hits_gamma_v;
        return finish(cls, contact.lambda, contact_u, contact.v);
      }
    }

    arclength += ds;
    enforce_box_bounds(untransform_w(step.y.w, step.y.v, ctx), step.y.v, step.y.lambda, ctx);
    branch.points.push_back(make_point(step.y, ctx, bundle.Phi, W, arclength, step.residual));
    prev = cur;
    cur = step.y;

    if (branch.points.size() >= 2) {
      auto cls = classify_endpoint(branch.points, params, grid, controls.thresholds);
      if (cls) {
        const BranchPoint& lastp = branch.points.back();
        return finish(*cls, lastp.lambda, lastp.u, lastp.v);
      }
    }

    if (++successes >= controls.grow_after) {
      ds = std::min(ds * controls.grow_factor, controls.max_step);
      successes = 0;
    }
  }

  const BranchPoint& lastp = branch.points.back();
  return finish(EndpointClass::step_budget, lastp.lambda, lastp.u, lastp.v);
}

std::vector<double> bifurcation_point_scan(const ModelParams& params, const Grid& grid,
                                           double lo, double hi, int samples) {
  validate_params(params);
  if (!(hi > lo) || samples < 2)
    throw config_error("invalid-argument", "scan range must satisfy hi > lo, samples >= 2");
  auto omega_sol = solve_logistic(Coefficient(params.D), params.mu, Coefficient(1.0), grid);
  if (!omega_sol)
    throw precondition_error("prey-state-missing",
                             "mu <= D sigma_1: the prey-only state does not exist");
  const Field& omega = omega_sol->theta;
  ModelContext ctx(params, 1.25 * std::max(params.mu, 1.0));
  const Field g_omega = ctx.g(omega);
  const int n = grid.n;
  std::vector<double> E(n), pval(n), base_q(n);
  for (int i = 0; i < n; ++i) {
    E[i] = std::exp(g_omega[i]);
    pval[i] = params.motility.d(omega[i]) * E[i];
    base_q[i] = -params.gamma * params.response.F(omega[i]) * E[i];
  }
  const double d0 = params.motility.d(0.0);
  const Coefficient p = Coefficient::from_nodal(std::move(pval), d0, d0);
  const Coefficient r = Coefficient::from_nodal(std::vector<double>(E), 1.0, 1.0);

  auto sigma_at = [&](double lambda) {
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) q[i] = base_q[i] - lambda * E[i];
    return principal_eigen(p, Coefficient::from_nodal(std::move(q), -lambda, -lambda), r,
                           grid)
        .sigma;
  };

  std::vector<double> roots;
  double prev_x = lo, prev_f = sigma_at(lo);
  for (int k = 1; k < samples; ++k) {
    const double x = lo + (hi - lo) * k / (samples - 1);
    const double f = sigma_at(x);
    if (prev_f == 0.0) {
      roots.push_back(prev_x);
    } else if (prev_f * f < 0.0) {
      double a = prev_x, b = x, fa = prev_f;
      while (b - a > 1e-10) {
        const double m = 0.5 * (a + b);
        const double fm = sigma_at(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if (fa * fm < 0.0) {
          b = m;
        } else {
          a = m;
          fa = fm;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_f = f;
  }
  if (prev_f == 0.0) roots.push_back(prev_x);
  return roots;
}

} // namespace preytaxis
