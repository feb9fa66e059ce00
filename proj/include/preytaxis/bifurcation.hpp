#pragma once

// Threshold quantities attached to the prey-only branch (0, omega_mu):
//
//  * lambda_mu: principal eigenvalue of the transformed prey-invasion
//    linearization, with eigenfunction Phi_mu > 0 normalized by
//    int e^{g(omega)} Phi^2 dx = 1, the untransformed phi_mu = e^{g} Phi_mu,
//    and psi_mu = -(-D lap + 2 omega - mu)^{-1} (F(omega) e^{g} Phi_mu) < 0;
//  * the bifurcation direction lambda'(0) by quadrature of the eigentriple;
//  * lambda_star(mu): the unique lambda with mu_lambda = mu, where
//    mu_lambda = sigma_1(D, theta_lambda F'(0); 1), for responses with
//    F'(0) > 0;
//  * linearized stability verdicts for both semitrivial states;
//  * the nonexistence lower bound (no coexistence for lambda below it).

#include <optional>
#include <string>
#include <utility>

#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/scalar_solvers.hpp"

namespace preytaxis {

struct BifurcationBundle {
  double lambda_mu = 0;
  Field omega;   // prey-only state omega_mu
  Field g_omega; // g(omega)
  Field E;       // e^{g(omega)}
  Field Phi;     // transformed eigenfunction, positive, weighted-normalized
  Field phi;     // e^{g(omega)} Phi
  Field psi;     // strictly negative v-response direction
  double lambda_prime0 = 0;
  double eig_residual = 0;
};

// Throws prey-state-missing when mu <= D sigma_1 (omega_mu does not exist).
BifurcationBundle lambda_mu_bundle(const ModelParams& params, const Grid& grid);

// Bifurcation direction from the eigentriple:
//   lambda'(0) = [ int (d'(om)+chi(om)) e^g psi |grad Phi|^2
//                + int e^{2g} Phi^3
//                - lambda_mu int (chi/d)(om) e^g psi Phi^2
//                - gamma int (F'(om) + (chi/d)(om) F(om)) e^g psi Phi^2 ]
//              / int e^g Phi^2.
double lambda_prime0(const BifurcationBundle& b, const ModelParams& params);

// Bisection for mu_lambda = mu on [d(0) sigma_1 + eps, hi], growing hi by
// doubling until the bracket holds; lambda tolerance 1e-8. Throws
// not-applicable when F'(0) = 0 and prey-state-missing when mu <= D sigma_1.
double lambda_star(double mu, const ModelParams& params, const Grid& grid,
                   std::optional<std::pair<double, double>> bracket = std::nullopt);

enum class Verdict { stable, unstable, missing };

const char* to_string(Verdict v);

struct StabilityVerdict {
  Verdict verdict = Verdict::missing;
  double margin = 0; // lambda_mu - lambda (prey-only), mu_lambda - mu (predator-only)
  std::string detail;
};

enum class SemitrivialKind { prey_only, predator_only };

// Linearized stability of the semitrivial states: (0, omega_mu) is stable
// exactly when lambda < lambda_mu; (theta_lambda, 0) exactly when
// mu < mu_lambda (for F'(0) = 0, mu_lambda = D sigma_1, so it is unstable
// whenever the prey can persist).
StabilityVerdict classify_semitrivial(SemitrivialKind which, double lambda,
                                      const ModelParams& params, const Grid& grid);

// Three-case lower bound: with s = sigma_1(d(mu), -gamma e^{g(mu)} max F; 1),
// returns sigma_1(d(mu), -gamma e^{g(mu)} max F; e^{g(mu)}) when s > 0,
// zero when |s| <= 1e-10, and s when s < 0. No coexistence state exists at
// any lambda <= the returned value.
double nonexistence_lower_bound(const ModelParams& params, const Grid& grid);

} // namespace preytaxis
