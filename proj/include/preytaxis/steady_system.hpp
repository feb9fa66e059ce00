#pragma once

// Steady-state residuals for the taxis system
//
//   -( d(v) u' - u chi(v) v' )' = lambda u - u^2 + gamma u F(v)
//   -D v''                      = mu v - v^2 - u F(v)
//
// in the original (u, v) variables and in the transformed (w, v) variables
// with w = e^{-g(v)} u, where the first equation becomes
//
//   -( d(v) e^{g(v)} w' )' = e^{g(v)} w ( lambda - e^{g(v)} w + gamma F(v) ),
//
// plus analytic Jacobians for both forms and the damped Newton solver on the
// transformed form.

#include <utility>

#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"

namespace preytaxis {

enum class StateKind { trivial, prey_only, predator_only, coexistence };

const char* to_string(StateKind k);

struct SteadyState {
  Field u, v;
  double lambda = 0;
  StateKind kind = StateKind::trivial;
  double residual_norm = 0; // sup-norm of the transformed-system residual
  int newton_iterations = 0;
  bool positive = false; // u > 0 and v > 0 nodally
};

// Untransformed residual; the advective face flux averages u and chi(v)
// separately and multiplies by the two-point gradient of v.
std::pair<Field, Field> residual(const Field& u, const Field& v, double lambda,
                                 const ModelParams& params);

Field transform_w(const Field& u, const Field& v, const ModelContext& ctx);
Field untransform_w(const Field& w, const Field& v, const ModelContext& ctx);

// Transformed residual (the form Newton iterates on).
std::pair<Field, Field> residual_w(const Field& w, const Field& v, double lambda,
                                   const ModelContext& ctx);

// 2x2 block linearization: three tridiagonal blocks and one diagonal block
// (the second equation couples to the first variable only through F(v)).
struct BlockJacobian {
  TridiagonalOperator a11; // d(first eq)/d(first var)
  TridiagonalOperator a12; // d(first eq)/d(v)
  std::vector<double> a21; // diagonal d(second eq)/d(first var)
  TridiagonalOperator a22; // d(second eq)/d(v)

  std::pair<Field, Field> apply(const Field& x1, const Field& x2) const;
  // Interleaved assembly (x1_0, x2_0, x1_1, x2_1, ...): bandwidth (2, 3).
  linalg::BandedMatrix banded() const;
};

BlockJacobian jacobian(const Field& u, const Field& v, double lambda,
                       const ModelParams& params);
BlockJacobian jacobian_w(const Field& w, const Field& v, double lambda,
                         const ModelContext& ctx);

struct NewtonOptions {
  double tol = 1e-9;
  int max_iter = 50;
  double class_threshold = 1e-8; // sup-norm threshold for the kind labels
  bool enforce_box = true;       // a-priori sup bounds on positive roots
};

// Damped Newton on the transformed form from the given start. Classifies the
// root by the sup-norm thresholds and, for nodally positive coexistence
// roots, enforces the a-priori box
//   max v <= mu,  max u <= e^{g(mu)} (|lambda| + gamma max_{[0,mu]} F)
// with 1e-8 relative slack. Throws ConvergenceError (with the residual
// history) on failure.
SteadyState newton_solve(const Field& u0, const Field& v0, double lambda,
                         const ModelContext& ctx, const NewtonOptions& opts = {});

// Convenience overload building a context sized to the inputs.
SteadyState newton_solve(const Field& u0, const Field& v0, double lambda,
                         const ModelParams& params, const NewtonOptions& opts = {});

// Checks the a-priori box for a nodally positive state; throws internal
// box-bound on violation.
void enforce_box_bounds(const Field& u, const Field& v, double lambda,
                        const ModelContext& ctx);

} // namespace preytaxis
