#pragma once

// Principal (smallest) eigenvalue of the weighted Sturm-Liouville pencil
//   A(p, q) phi = sigma R(r) phi,   A = assemble_div_form(p, q),  R = diag(r),
// and the diffusive-logistic solver
//   -(p theta')' = a theta - b theta^2,  theta > 0, homogeneous Dirichlet,
// which has a positive solution exactly when a > sigma_1(p, 0; 1).

#include <optional>

#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"

namespace preytaxis {

struct EigenPair {
  double sigma = 0;
  Field phi;           // strictly positive, normalized h * sum r phi^2 = 1
  double residual = 0; // ||A phi - sigma R phi||_inf relative to ||A||_inf
  int iterations = 0;
};

// Requires p > 0 (nodal and boundary) and r > 0 nodal; throws
// coefficient-sign otherwise. Shifted inverse power iteration (shift from the
// Gershgorin lower bound of the symmetrized pencil minus one) with
// Rayleigh-quotient refinement.
EigenPair principal_eigen(const Coefficient& p, const Coefficient& q,
                          const Coefficient& r, const Grid& grid);

struct LogisticSolution {
  Field theta;
  double a = 0;
  double sigma1 = 0;   // existence threshold sigma_1(p, 0; 1)
  double residual = 0; // sup-norm of the discrete residual at the solution
  int newton_iterations = 0;
};

// Returns nullopt when a <= sigma_1(p, 0; 1). b must be bounded below by a
// positive constant. Damped Newton from the scaled eigenfunction start
// theta_0 = (a - sigma_1) / (sup b * sup phi_1) * phi_1, which is a discrete
// subsolution; the converged state is checked against the nodal sandwich
//   theta_0 <= theta <= a / min b.
std::optional<LogisticSolution> solve_logistic(const Coefficient& p, double a,
                                               const Coefficient& b, const Grid& grid);

struct SemitrivialStates {
  std::optional<LogisticSolution> predator_only; // theta_lambda: -(d(0) u')' = lambda u - u^2
  std::optional<LogisticSolution> prey_only;     // omega_mu: -D v'' = mu v - v^2
};

SemitrivialStates semitrivial_states(const ModelParams& params, const Grid& grid);

} // namespace preytaxis
