#include "preytaxis/model.hpp"

#include <cmath>

#include "preytaxis/errors.hpp"

namespace preytaxis {

ResponseFunction make_response(const std::string& label, double zeta) {
  ResponseFunction r;
  r.label = label;
  r.zeta = zeta;
  if (label == "lotka-volterra") {
    r.F = [](double v) { return v; };
    r.dF = [](double) { return 1.0; };
    r.FF = [](double) { return 1.0; };
    return r;
  }
  if (!(zeta > 0.0))
    throw precondition_error("invalid-argument", "response '" + label + "' needs zeta > 0");
  if (label == "holling2") {
    r.F = [zeta](double v) { return v / (zeta + v); };
    r.dF = [zeta](double v) { return zeta / ((zeta + v) * (zeta + v)); };
    r.FF = [zeta](double v) { return 1.0 / (zeta + v); };
    return r;
  }
  if (label == "holling3") {
    r.F = [zeta](double v) { return v * v / (zeta + v * v); };
    r.dF = [zeta](double v) {
      const double den = zeta + v * v;
      return 2.0 * zeta * v / (den * den);
    };
    r.FF = [zeta](double v) { return v / (zeta + v * v); };
    return r;
  }
  if (label == "holling4") {
    r.F = [zeta](double v) { return v / (zeta + v * v); };
    r.dF = [zeta](double v) {
      const double den = zeta + v * v;
      return (zeta - v * v) / (den * den);
    };
    r.FF = [zeta](double v) { return 1.0 / (zeta + v * v); };
    return r;
  }
  throw precondition_error("invalid-argument", "unknown response label '" + label + "'");
}

MotilitySpec constant_motility(double d0, double chi0) {
  if (!(d0 > 0.0))
    throw precondition_error("invalid-argument", "constant motility needs d > 0");
  MotilitySpec m;
  m.d = [d0](double) { return d0; };
  m.dd = [](double) { return 0.0; };
  m.chi = [chi0](double) { return chi0; };
  m.dchi = [](double) { return 0.0; };
  return m;
}

MotilitySpec rational_motility(double a, double b, double chi0) {
  if (a < 0.0 || b < 0.0)
    throw precondition_error("invalid-argument", "rational motility needs a, b >= 0");
  MotilitySpec m;
  m.d = [a, b](double v) { return 1.0 + a / (1.0 + b * v); };
  m.dd = [a, b](double v) {
    const double den = 1.0 + b * v;
    return -a * b / (den * den);
  };
  m.chi = [chi0](double) { return chi0; };
  m.dchi = [](double) { return 0.0; };
  return m;
}

void validate_params(const ModelParams& p) {
  if (!(p.mu > 0.0)) throw precondition_error("invalid-argument", "mu must be positive");
  if (!(p.D > 0.0)) throw precondition_error("invalid-argument", "D must be positive");
  if (!(p.gamma >= 0.0))
    throw precondition_error("invalid-argument", "gamma must be nonnegative");
  if (!p.motility.d || !p.motility.dd || !p.motility.chi || !p.motility.dchi)
    throw precondition_error("invalid-argument", "motility functions are not all set");
  if (!p.response.F || !p.response.dF || !p.response.FF)
    throw precondition_error("invalid-argument", "response functions are not all set");
}

HypothesisReport validate_hypotheses(const ModelParams& p, double v_max) {
  if (!(v_max > 0.0))
    throw precondition_error("invalid-argument", "hypothesis check needs v_max > 0");
  HypothesisReport rep;
  auto flag = [&rep](const std::string& hyp, double v, const std::string& detail) {
    rep.ok = false;
    rep.violations.push_back({hyp, v, detail});
  };

  const int samples = 1000;
  bool d_ok = true, chi_ok = true, resp_ok = true;
  if (std::abs(p.response.F(0.0)) > 1e-12) {
    resp_ok = false;
    flag("response", 0.0, "F(0) is not zero");
  }
  for (int k = 0; k < samples; ++k) {
    const double v = v_max * k / (samples - 1);
    if (d_ok) {
      const double dv = p.motility.d(v);
      const double ddv = p.motility.dd(v);
      if (!(dv > 0.0)) {
        d_ok = false;
        flag("d-positive-decreasing", v, "d(v) <= 0");
      } else if (ddv > 0.0) {
        d_ok = false;
        flag("d-positive-decreasing", v, "d'(v) > 0");
      }
    }
    if (chi_ok && p.motility.chi(v) < 0.0) {
      chi_ok = false;
      flag("chi-nonnegative", v, "chi(v) < 0");
    }
    if (resp_ok && v > 0.0) {
      const double Fv = p.response.F(v);
      if (!(Fv > 0.0)) {
        resp_ok = false;
        flag("response", v, "F(v) <= 0 for v > 0");
      } else if (std::abs(Fv - v * p.response.FF(v)) > 1e-12 * std::max(1.0, Fv)) {
        resp_ok = false;
        flag("response", v, "F(v) and v*FF(v) disagree");
      }
    }
  }
  return rep;
}

namespace {
const ModelParams& checked(const ModelParams& p) {
  validate_params(p);
  return p;
}
} // namespace

ModelContext::ModelContext(const ModelParams& p, double v_cap_hint)
    : params(checked(p)),
      g(p.motility.d, p.motility.chi,
        v_cap_hint > 0.0 ? v_cap_hint : 1.25 * std::max(p.mu, 1.0)) {
  g_mu = g(p.mu);
  // max of F over [0, mu] by dense sampling; the catalog responses are smooth
  // so 4096 cells keep the relative slack far below the box tolerance
  const int cells = 4096;
  double m = 0;
  for (int k = 0; k <= cells; ++k) m = std::max(m, params.response.F(params.mu * k / cells));
  max_F_on_0_mu = m;
}

} // namespace preytaxis
