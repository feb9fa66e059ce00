#pragma once

// Pseudo-arclength continuation of the coexistence branch out of the
// prey-only state at lambda_mu: predictor-corrector tracing in the
// transformed variables (w, v, lambda) with a weighted arclength
// normalization, adaptive step control, fold counting, endpoint detection
// against both semitrivial branches, and an independent eigenvalue scan that
// relocates the bifurcation point.

#include <optional>
#include <string>
#include <vector>

#include "preytaxis/bifurcation.hpp"
#include "preytaxis/grid.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/steady_system.hpp"

namespace preytaxis {

enum class EndpointClass {
  hits_gamma_u,       // met the predator-only branch (v -> 0, u -> theta_lambda)
  hits_gamma_v,       // met the prey-only branch (u -> 0, v -> omega_mu)
  reached_lambda_cap, // passed the configured lambda cap without an endpoint
  step_failure,       // corrector failed at the minimum step
  step_budget,        // arclength step budget exhausted
};

const char* to_string(EndpointClass c);

struct EndpointThresholds {
  double semitrivial_sup = 1e-6;      // sup of the vanishing component
  double semitrivial_distance = 1e-4; // sup distance to the semitrivial profile
  double lambda_cap = 50.0;

  bool operator==(const EndpointThresholds&) const = default;
};

struct BranchPoint {
  double lambda = 0;
  Field u, v;           // nodally positive on accepted coexistence points
  double arclength = 0; // cumulative weighted arclength from the bifurcation point
  double amplitude = 0; // weighted projection of w onto the bifurcation eigenfunction
  double residual = 0;  // transformed steady residual at acceptance
  bool positive = true;
};

struct ContinuationControls {
  double initial_step = 1e-3;
  double min_step = 1e-5;
  double max_step = 0.1;
  double grow_factor = 1.3;
  int grow_after = 3; // consecutive corrector successes before growing
  int max_steps = 10000;
  double corrector_tol = 1e-9;
  int max_corrector_iterations = 12;
  int max_first_step_halvings = 10;
  EndpointThresholds thresholds;

  bool operator==(const ContinuationControls&) const = default;
};

struct Branch {
  std::vector<BranchPoint> points; // strictly positive coexistence states
  std::string origin = "bifurcation-from-Gamma-v";
  double origin_lambda = 0; // lambda_mu of the bundle the trace started from
  EndpointClass endpoint = EndpointClass::step_failure;
  int fold_count = 0;                    // lambda-direction reversals
  double lambda_min = 0, lambda_max = 0; // lambda projection of the traced points
  double endpoint_lambda = 0;            // refined terminal lambda
  Field terminal_u, terminal_v;          // contact profile at the endpoint
};

// Traces the branch from (lambda_mu, 0, omega_mu) into u > 0. The first
// predictor comes from the eigentriple (Phi, psi, lambda'(0)); later steps
// use secant predictors. The corrector is Newton on the steady residual plus
// the weighted tangent condition, solved through a bordered Schur complement
// on the banded block system with a dense bordered fallback near folds.
// Steps halve on corrector failure and grow after repeated successes within
// [min_step, max_step]. A corrected iterate with a negative nodal component
// triggers arclength bisection back to the contact point with the
// semitrivial branch, which is stored as the terminal profile. Throws
// ConvergenceError bifurcation-start when the first step fails after the
// configured halvings (wrong lambda_mu or grid too coarse).
Branch branch_from_prey_bifurcation(const BifurcationBundle& bundle,
                                    const ModelParams& params, const Grid& grid,
                                    const ContinuationControls& controls = {});

// Classifies a traced tail (>= 2 points): the lambda cap first, then the
// semitrivial-contact thresholds (sup of the vanishing component below
// semitrivial_sup and sup distance to the matching semitrivial profile below
// semitrivial_distance). nullopt while the tail is still interior.
std::optional<EndpointClass> classify_endpoint(const std::vector<BranchPoint>& tail,
                                               const ModelParams& params,
                                               const Grid& grid,
                                               const EndpointThresholds& thresholds);

// Number of lambda-direction reversals along the ordered points.
int count_lambda_folds(const std::vector<BranchPoint>& points);

// Samples the principal eigenvalue of the lambda-shifted prey-invasion
// linearization around (0, omega_mu) on [lo, hi] (the value is
// lambda_mu - lambda) and bisects every sign change to width 1e-10.
// Returns the detected lambda values; exactly one is expected.
std::vector<double> bifurcation_point_scan(const ModelParams& params, const Grid& grid,
                                           double lo, double hi, int samples = 64);

} // namespace preytaxis
