#include "preytaxis/scalar_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "preytaxis/errors.hpp"

namespace preytaxis {

namespace {

std::vector<double> weight_values(const Coefficient& r, int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = r.at(i);
  return w;
}

double rayleigh(const TridiagonalOperator& A, const std::vector<double>& r,
                const std::vector<double>& x) {
  const auto ax = A.apply(x);
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += x[i] * ax[i];
    den += x[i] * x[i] * r[i];
  }
  return num / den;
}

void normalize_r(std::vector<double>& x, const std::vector<double>& r, double h) {
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += r[i] * x[i] * x[i];
  s = std::sqrt(h * s);
  for (double& v : x) v /= s;
}

} // namespace

EigenPair principal_eigen(const Coefficient& p, const Coefficient& q,
                          const Coefficient& r, const Grid& grid) {
  const int n = grid.n;
  if (!(p.min_value(n) > 0.0) || !(p.boundary_left() > 0.0) || !(p.boundary_right() > 0.0))
    throw precondition_error("coefficient-sign", "p must be positive");
  if (!(r.min_value(n) > 0.0))
    throw precondition_error("coefficient-sign", "weight r must be positive");

  const TridiagonalOperator A = assemble_div_form(p, q, grid);
  const std::vector<double> rw = weight_values(r, n);

  // Gershgorin lower bound of R^{-1/2} A R^{-1/2}, minus one
  double lower = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double row = A.diag[i] / rw[i];
    if (i > 0) row -= std::abs(A.sub[i - 1]) / std::sqrt(rw[i] * rw[i - 1]);
    if (i < n - 1) row -= std::abs(A.super[i]) / std::sqrt(rw[i] * rw[i + 1]);
    lower = std::min(lower, row);
  }
  const double shift0 = lower - 1.0;

  TridiagonalOperator As = A;
  for (int i = 0; i < n; ++i) As.diag[i] -= shift0 * rw[i];

  std::vector<double> x(n, 1.0);
  normalize_r(x, rw, grid.h);
  double sigma = rayleigh(A, rw, x);
  const double scale = std::max(1.0, A.row_sum_norm());
  int iterations = 0;

  // Fixed-shift inverse iteration: the shifted matrix is positive definite,
  // so the Thomas solve is safe.
  for (int k = 0; k < 400; ++k) {
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = rw[i] * x[i];
    x = As.solve(std::move(rhs));
    normalize_r(x, rw, grid.h);
    const double next = rayleigh(A, rw, x);
    ++iterations;
    if (std::abs(next - sigma) <= 1e-8 * std::max(1.0, std::abs(next)) && k >= 2) {
      sigma = next;
      break;
    }
    sigma = next;
  }

  // Rayleigh-quotient refinement; the shifted systems are nearly singular,
  // so use the pivoting solve and fall back to the last iterate if one blows up.
  const double tol = std::max(1e-12, 1e-14 * std::abs(sigma));
  for (int k = 0; k < 60; ++k) {
    TridiagonalOperator Aq = A;
    for (int i = 0; i < n; ++i) Aq.diag[i] -= sigma * rw[i];
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) rhs[i] = rw[i] * x[i];
    std::vector<double> y;
    try {
      y = Aq.solve_pivoting(std::move(rhs));
    } catch (const Error&) {
      break; // exactly singular shift: current x is the eigenvector
    }
    bool finite = true;
    for (double v : y)
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
    if (!finite) break;
    normalize_r(y, rw, grid.h);
    x = std::move(y);
    const double next = rayleigh(A, rw, x);
    ++iterations;
    const double inc = std::abs(next - sigma);
    sigma = next;
    if (inc <= tol) break;
  }

  // Principal eigenvectors of the (negated off-diagonal) tridiagonal pencil
  // are one-signed; orient positive.
  int imax = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
  if (x[imax] < 0)
    for (double& v : x) v = -v;
  for (double v : x)
    if (!(v > 0.0))
      throw internal_error("eigen-positivity",
                           "principal eigenvector is not strictly positive");

  const auto ax = A.apply(x);
  double res = 0;
  for (int i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - sigma * rw[i] * x[i]));
  res /= scale;
  if (res > 1e-10)
    throw ConvergenceError("eigen", "principal eigenvalue iteration stalled (residual " +
                                        std::to_string(res) + ")");

  EigenPair out;
  out.sigma = sigma;
  out.phi = Field(grid, std::move(x));
  out.residual = res;
  out.iterations = iterations;
  return out;
}

namespace {

// Residual G(theta) = A theta - a theta + b theta^2 together with an estimate
// of its roundoff floor (the cancellation scale of the stencil terms).
struct LogisticResidual {
  std::vector<double> g;
  double norm = 0;
  double floor = 0;
};

LogisticResidual logistic_residual(const TridiagonalOperator& A, double a,
                                   const Coefficient& b, const std::vector<double>& th) {
  const int n = static_cast<int>(th.size());
  LogisticResidual out;
  out.g = A.apply(th);
  constexpr double eps = 2.3e-16;
  for (int i = 0; i < n; ++i) {
    const double react = a * th[i] - b.at(i) * th[i] * th[i];
    double mag = std::abs(out.g[i]) + std::abs(react);
    if (i > 0) mag += 2.0 * std::abs(A.sub[i - 1] * th[i - 1]);
    if (i < n - 1) mag += 2.0 * std::abs(A.super[i] * th[i + 1]);
    mag += std::abs(A.diag[i] * th[i]);
    out.g[i] -= react;
    out.norm = std::max(out.norm, std::abs(out.g[i]));
    out.floor = std::max(out.floor, eps * mag);
  }
  return out;
}

} // namespace

std::optional<LogisticSolution> solve_logistic(const Coefficient& p, double a,
                                               const Coefficient& b, const Grid& grid) {
  const int n = grid.n;
  if (!(b.min_value(n) > 0.0))
    throw precondition_error("coefficient-sign", "b must be bounded below by a positive constant");

  const EigenPair eig = principal_eigen(p, Coefficient(0.0), Coefficient(1.0), grid);
  if (!(a > eig.sigma)) return std::nullopt;

  const TridiagonalOperator A = assemble_div_form(p, Coefficient(0.0), grid);
  const double phi_sup = eig.phi.sup_norm();
  const double eps0 = (a - eig.sigma) / (b.max_abs() * phi_sup);
  std::vector<double> lower_bound(n); // subsolution: theta stays above it
  for (int i = 0; i < n; ++i) lower_bound[i] = eps0 * eig.phi[i];

  // First-order amplitude of the branch leaving the threshold; near a = sigma
  // the linearization at this start is positive definite, which keeps Newton
  // out of the trivial root's basin.
  double cubic = 0.0;
  for (int i = 0; i < n; ++i) cubic += b.at(i) * eig.phi[i] * eig.phi[i] * eig.phi[i];
  const double s0 = (a - eig.sigma) / (grid.h * cubic);
  std::vector<double> theta(n);
  for (int i = 0; i < n; ++i) theta[i] = std::max(s0 * eig.phi[i], lower_bound[i]);

  std::vector<double> history;
  LogisticResidual res = logistic_residual(A, a, b, theta);
  history.push_back(res.norm);
  int iter = 0;
  const int max_iter = 50;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    const double tol = std::max(1e-12, 4.0 * res.floor);
    if (res.norm <= tol) {
      converged = true;
      break;
    }
    TridiagonalOperator J = A;
    for (int i = 0; i < n; ++i) J.diag[i] += -a + 2.0 * b.at(i) * theta[i];
    std::vector<double> step = J.solve_pivoting(res.g);
    // damped update: halve until the residual decreases; iterates never drop
    // below the subsolution, so the trivial root stays out of reach
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      std::vector<double> cand(n);
      for (int i = 0; i < n; ++i)
        cand[i] = std::max(theta[i] - alpha * step[i], lower_bound[i]);
      LogisticResidual rc = logistic_residual(A, a, b, cand);
      if (rc.norm < res.norm) {
        theta = std::move(cand);
        res = std::move(rc);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    history.push_back(res.norm);
    if (!accepted)
      throw ConvergenceError("logistic",
                             "damped Newton stalled at residual " + std::to_string(res.norm),
                             history);
  }
  if (!converged) {
    const double tol = std::max(1e-12, 4.0 * res.floor);
    if (res.norm > tol)
      throw ConvergenceError("logistic", "Newton did not converge within 50 iterations",
                             history);
  }

  for (double v : theta)
    if (!(v > 0.0))
      throw ConvergenceError("logistic-positivity", "converged state is not positive", history);

  // nodal sandwich: subsolution below, a / min b above
  const double upper = a / b.min_value(n);
  for (int i = 0; i < n; ++i) {
    if (theta[i] < lower_bound[i] * (1.0 - 1e-10) - 1e-13)
      throw internal_error("logistic-sandwich", "state dips below the subsolution");
    if (theta[i] > upper * (1.0 + 1e-12))
      throw internal_error("logistic-sandwich", "state exceeds a / min b");
  }

  LogisticSolution out;
  out.theta = Field(grid, std::move(theta));
  out.a = a;
  out.sigma1 = eig.sigma;
  out.residual = res.norm;
  out.newton_iterations = iter;
  return out;
}

SemitrivialStates semitrivial_states(const ModelParams& params, const Grid& grid) {
  validate_params(params);
  SemitrivialStates out;
  const double d0 = params.motility.d(0.0);
  out.predator_only = solve_logistic(Coefficient(d0), params.lambda, Coefficient(1.0), grid);
  out.prey_only = solve_logistic(Coefficient(params.D), params.mu, Coefficient(1.0), grid);
  return out;
}

} // namespace preytaxis
