#pragma once

// Model data for the predator-prey taxis system: the functional-response
// catalog, prey-dependent motility, scalar parameters, hypothesis validation,
// and the bundled evaluation context (g-table plus a-priori bounds) shared by
// the solvers.

#include <functional>
#include <string>
#include <vector>

#include "preytaxis/grid.hpp"

namespace preytaxis {

using ScalarFn = std::function<double(double)>;

// Predation response F with F(0) = 0. FF is the ratio F(v)/v extended
// continuously to v = 0, so FF(0) = F'(0).
struct ResponseFunction {
  std::string label;
  double zeta = 1.0;
  ScalarFn F, dF, FF;

  double fprime0() const { return FF(0.0); }
};

// Labels: "lotka-volterra" (v), "holling2" (v/(zeta+v)),
// "holling3" (v^2/(zeta+v^2)), "holling4" (v/(zeta+v^2)).
ResponseFunction make_response(const std::string& label, double zeta = 1.0);

// Prey-dependent motility d(v) (with derivative) and taxis sensitivity
// chi(v) (with derivative; the untransformed Jacobian needs it).
struct MotilitySpec {
  ScalarFn d, dd, chi, dchi;
};

MotilitySpec constant_motility(double d0, double chi0);
// d(v) = 1 + a / (1 + b v), chi constant; a, b >= 0 keeps d positive decreasing.
MotilitySpec rational_motility(double a, double b, double chi0);

struct ModelParams {
  double lambda = 0;
  double mu = 0;
  double gamma = 0;
  double D = 1;
  MotilitySpec motility;
  ResponseFunction response;
};

// mu > 0, D > 0, gamma >= 0; throws invalid-argument otherwise.
void validate_params(const ModelParams& p);

struct HypothesisViolation {
  std::string hypothesis; // "d-positive-decreasing", "chi-nonnegative", "response"
  double v;               // sample where the check failed
  std::string detail;
};

struct HypothesisReport {
  bool ok = true;
  std::vector<HypothesisViolation> violations;
};

// Samples 1000 points of [0, v_max] and checks d > 0, d' <= 0, chi >= 0,
// F(0) = 0, F > 0 on (0, v_max], and |F(v) - v FF(v)| <= 1e-12 scale.
HypothesisReport validate_hypotheses(const ModelParams& p, double v_max);

// Evaluation context: the g antiderivative table on [0, v_cap] plus the
// scalar bounds used by the a-priori box (g(mu) and max F on [0, mu]).
struct ModelContext {
  ModelParams params;
  GTable g;
  double g_mu = 0;
  double max_F_on_0_mu = 0;

  // v_cap_hint <= 0 selects the default 1.25 * max(mu, 1).
  explicit ModelContext(const ModelParams& p, double v_cap_hint = 0);
};

} // namespace preytaxis
