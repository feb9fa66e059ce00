#include "preytaxis/bifurcation.hpp"

#include <cmath>

#include "preytaxis/errors.hpp"

namespace preytaxis {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::missing: return "missing";
  }
  return "?";
}

namespace {

// Coefficients of the transformed prey-invasion eigenproblem at (0, omega):
// p = d(omega) e^{g(omega)}, q = -gamma F(omega) e^{g(omega)}, r = e^{g(omega)}.
struct InvasionCoefficients {
  Coefficient p, q, r;
  Field g_omega, E;
};

InvasionCoefficients invasion_coefficients(const Field& omega, const ModelContext& ctx) {
  const int n = omega.size();
  Field g_omega = ctx.g(omega);
  Field E(omega.grid);
  std::vector<double> p(n), q(n), r(n);
  for (int i = 0; i < n; ++i) {
    E[i] = std::exp(g_omega[i]);
    p[i] = ctx.params.motility.d(omega[i]) * E[i];
    q[i] = -ctx.params.gamma * ctx.params.response.F(omega[i]) * E[i];
    r[i] = E[i];
  }
  const double d0 = ctx.params.motility.d(0.0);
  InvasionCoefficients out;
  out.p = Coefficient::from_nodal(std::move(p), d0, d0);
  out.q = Coefficient::from_nodal(std::move(q), 0.0, 0.0);
  out.r = Coefficient::from_nodal(std::move(r), 1.0, 1.0);
  out.g_omega = std::move(g_omega);
  out.E = std::move(E);
  return out;
}

Field prey_state_or_throw(const ModelParams& params, const Grid& grid) {
  auto omega = solve_logistic(Coefficient(params.D), params.mu, Coefficient(1.0), grid);
  if (!omega)
    throw precondition_error("prey-state-missing",
                             "mu <= D sigma_1: the prey-only state does not exist");
  return std::move(omega->theta);
}

} // namespace

BifurcationBundle lambda_mu_bundle(const ModelParams& params, const Grid& grid) {
  validate_params(params);
  BifurcationBundle b;
  b.omega = prey_state_or_throw(params, grid);
  ModelContext ctx(params, 1.25 * std::max(params.mu, 1.0));
  InvasionCoefficients ic = invasion_coefficients(b.omega, ctx);

  EigenPair eig = principal_eigen(ic.p, ic.q, ic.r, grid);
  b.lambda_mu = eig.sigma;
  b.Phi = std::move(eig.phi);
  b.eig_residual = eig.residual;
  b.g_omega = std::move(ic.g_omega);
  b.E = std::move(ic.E);

  b.phi = Field(grid);
  for (int i = 0; i < grid.n; ++i) b.phi[i] = b.E[i] * b.Phi[i];

  // psi solves (-D lap + 2 omega - mu) psi = -F(omega) e^{g} Phi; the operator
  // is positive definite because omega itself is the principal eigenfunction
  // of (-D lap + omega - mu) with eigenvalue zero.
  std::vector<double> qv(grid.n);
  for (int i = 0; i < grid.n; ++i) qv[i] = 2.0 * b.omega[i] - params.mu;
  const TridiagonalOperator M =
      assemble_div_form(Coefficient(params.D),
                        Coefficient::from_nodal(std::move(qv), 0.0, 0.0), grid);
  std::vector<double> rhs(grid.n);
  for (int i = 0; i < grid.n; ++i)
    rhs[i] = -params.response.F(b.omega[i]) * b.E[i] * b.Phi[i];
  b.psi = Field(grid, M.solve(std::move(rhs)));
  // the right side is strictly negative, so inverse positivity of the
  // tridiagonal M-matrix makes psi strictly negative
  for (int i = 0; i < grid.n; ++i)
    if (!(b.psi[i] < 0.0))
      throw internal_error("psi-sign", "v-response direction is not strictly negative");

  b.lambda_prime0 = lambda_prime0(b, params);
  return b;
}

double lambda_prime0(const BifurcationBundle& b, const ModelParams& params) {
  const Grid& grid = b.omega.grid;
  const int n = grid.n;
  const Field dPhi = dirichlet_gradient(b.Phi);

  Field t1(grid), t2(grid), t3(grid), t4(grid), den(grid);
  for (int i = 0; i < n; ++i) {
    const double om = b.omega[i];
    const double E = b.E[i];
    const double Phi = b.Phi[i];
    const double psi = b.psi[i];
    const double chi = params.motility.chi(om);
    const double d = params.motility.d(om);
    t1[i] = (params.motility.dd(om) + chi) * E * psi * dPhi[i] * dPhi[i];
    t2[i] = E * E * Phi * Phi * Phi;
    t3[i] = (chi / d) * E * psi * Phi * Phi;
    t4[i] = (params.response.dF(om) + (chi / d) * params.response.F(om)) * E * psi * Phi * Phi;
    den[i] = E * Phi * Phi;
  }
  return (integrate(t1) + integrate(t2) - b.lambda_mu * integrate(t3) -
          params.gamma * integrate(t4)) /
         integrate(den);
}

namespace {

// mu_lambda = sigma_1(D, theta_lambda F'(0); 1); equals D sigma_1 for
// lambda at or below the predator threshold where theta_lambda vanishes.
double mu_of_lambda(double lambda, double fp0, double d0_sigma1,
                    const ModelParams& params, const Grid& grid) {
  const double d0 = params.motility.d(0.0);
  if (lambda <= d0_sigma1 * (1.0 + 1e-15))
    return principal_eigen(Coefficient(params.D), Coefficient(0.0), Coefficient(1.0), grid)
        .sigma;
  auto theta = solve_logistic(Coefficient(d0), lambda, Coefficient(1.0), grid);
  if (!theta)
    return principal_eigen(Coefficient(params.D), Coefficient(0.0), Coefficient(1.0), grid)
        .sigma;
  std::vector<double> q(grid.n);
  for (int i = 0; i < grid.n; ++i) q[i] = fp0 * theta->theta[i];
  return principal_eigen(Coefficient(params.D),
                         Coefficient::from_nodal(std::move(q), 0.0, 0.0),
                         Coefficient(1.0), grid)
      .sigma;
}

} // namespace

double lambda_star(double mu, const ModelParams& params, const Grid& grid,
                   std::optional<std::pair<double, double>> bracket) {
  validate_params(params);
  const double fp0 = params.response.fprime0();
  if (!(fp0 > 1e-14))
    throw precondition_error("not-applicable",
                             "lambda_star needs F'(0) > 0; this response has F'(0) = 0");
  const double d0 = params.motility.d(0.0);
  const double d0_sigma1 =
      principal_eigen(Coefficient(d0), Coefficient(0.0), Coefficient(1.0), grid).sigma;
  const double D_sigma1 =
      principal_eigen(Coefficient(params.D), Coefficient(0.0), Coefficient(1.0), grid).sigma;
  if (!(mu > D_sigma1))
    throw precondition_error("prey-state-missing",
                             "lambda_star needs mu > D sigma_1 so the prey persists");

  ModelParams p = params;
  p.mu = mu;
  auto gap = [&](double lam) { return mu_of_lambda(lam, fp0, d0_sigma1, p, grid) - mu; };

  double lo, hi;
  if (bracket) {
    lo = bracket->first;
    hi = bracket->second;
    if (!(gap(lo) < 0.0 && gap(hi) > 0.0))
      throw precondition_error("invalid-argument",
                               "supplied lambda_star bracket does not straddle the root");
  } else {
    lo = d0_sigma1 + std::max(1e-10, 1e-10 * std::abs(d0_sigma1));
    hi = d0_sigma1 + mu;
    int grow = 0;
    while (gap(hi) <= 0.0) {
      hi = d0_sigma1 + 2.0 * (hi - d0_sigma1);
      if (++grow > 60)
        throw ConvergenceError("lambda-star-bracket",
                               "could not bracket mu_lambda = mu while doubling");
    }
  }
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

StabilityVerdict classify_semitrivial(SemitrivialKind which, double lambda,
                                      const ModelParams& params, const Grid& grid) {
  validate_params(params);
  StabilityVerdict out;
  if (which == SemitrivialKind::prey_only) {
    const double D_sigma1 =
        principal_eigen(Coefficient(params.D), Coefficient(0.0), Coefficient(1.0), grid)
            .sigma;
    if (!(params.mu > D_sigma1)) {
      out.verdict = Verdict::missing;
      out.detail = "prey-only state needs mu > D sigma_1";
      return out;
    }
    ModelParams p = params;
    p.lambda = lambda;
    const BifurcationBundle b = lambda_mu_bundle(p, grid);
    out.margin = b.lambda_mu - lambda;
    out.verdict = out.margin > 0.0 ? Verdict::stable : Verdict::unstable;
    out.detail = "prey-only is stable exactly for lambda < lambda_mu";
    return out;
  }

  const double d0 = params.motility.d(0.0);
  const double d0_sigma1 =
      principal_eigen(Coefficient(d0), Coefficient(0.0), Coefficient(1.0), grid).sigma;
  if (!(lambda > d0_sigma1)) {
    out.verdict = Verdict::missing;
    out.detail = "predator-only state needs lambda > d(0) sigma_1";
    return out;
  }
  const double fp0 = params.response.fprime0();
  const double mu_lam = mu_of_lambda(lambda, fp0, d0_sigma1, params, grid);
  out.margin = mu_lam - params.mu;
  out.verdict = out.margin > 0.0 ? Verdict::stable : Verdict::unstable;
  out.detail = fp0 > 1e-14
                   ? "predator-only is stable exactly for mu < mu_lambda"
                   : "F'(0) = 0 keeps mu_lambda at D sigma_1, so persisting prey invades";
  return out;
}

double nonexistence_lower_bound(const ModelParams& params, const Grid& grid) {
  validate_params(params);
  ModelContext ctx(params, 1.25 * std::max(params.mu, 1.0));
  const double d_mu = params.motility.d(params.mu);
  const double e_g_mu = std::exp(ctx.g_mu);
  const Coefficient q(-params.gamma * e_g_mu * ctx.max_F_on_0_mu);
  const double s =
      principal_eigen(Coefficient(d_mu), q, Coefficient(1.0), grid).sigma;
  if (s > 1e-10)
    return principal_eigen(Coefficient(d_mu), q, Coefficient(e_g_mu), grid).sigma;
  if (s >= -1e-10) return 0.0;
  return s;
}

} // namespace preytaxis
