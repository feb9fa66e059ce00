#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "preytaxis/bifurcation.hpp"
#include "preytaxis/errors.hpp"
#include "preytaxis/scalar_solvers.hpp"
#include "preytaxis/steady_system.hpp"

using namespace preytaxis;

namespace {

// chi = -d' regime: the taxis flux folds into (d u)' exactly.
MotilitySpec folded_motility() {
  MotilitySpec m;
  m.d = [](double v) { return 1.0 + 1.0 / (1.0 + v); };
  m.dd = [](double v) { return -1.0 / ((1.0 + v) * (1.0 + v)); };
  m.chi = [](double v) { return 1.0 / ((1.0 + v) * (1.0 + v)); };
  m.dchi = [](double v) { return -2.0 / ((1.0 + v) * (1.0 + v) * (1.0 + v)); };
  return m;
}

} // namespace

TEST_SUITE("steady_system") {

TEST_CASE("residual vanishes on the trivial and semitrivial states") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 128);

  Field zero(g);
  auto [t1, t2] = residual(zero, zero, params.lambda, params);
  CHECK(t1.sup_norm() == 0.0);
  CHECK(t2.sup_norm() == 0.0);

  params.lambda = 5.0;
  SemitrivialStates s = semitrivial_states(params, g);
  REQUIRE(s.predator_only.has_value());
  auto [p1, p2] = residual(s.predator_only->theta, zero, params.lambda, params);
  CHECK(p1.sup_norm() <= 1e-10);
  CHECK(p2.sup_norm() <= 1e-10);

  REQUIRE(s.prey_only.has_value());
  auto [q1, q2] = residual(zero, s.prey_only->theta, params.lambda, params);
  CHECK(q1.sup_norm() <= 1e-10);
  CHECK(q2.sup_norm() <= 1e-10);
}

TEST_CASE("transform examples and round-trip") {
  Grid g = build_grid(4.0, 64);
  std::mt19937_64 rng(51);

  ModelParams notaxis = oracles::figure2_params();
  notaxis.motility = constant_motility(1.0, 0.0);
  ModelContext ctx0(notaxis);
  Field u = oracles::random_dirichlet_bump(g, rng, 1.0);
  Field v = oracles::random_dirichlet_bump(g, rng, 1.5);
  Field w0 = transform_w(u, v, ctx0);
  CHECK(sup_distance(w0, u) == 0.0);

  ModelParams taxis = oracles::figure2_params(); // d = 1, chi = 1: g(v) = v
  ModelContext ctx1(taxis);
  Field w1 = transform_w(v, v, ctx1);
  for (int i = 0; i < g.n; ++i)
    CHECK(w1[i] == doctest::Approx(v[i] * std::exp(-v[i])).epsilon(1e-12));

  Field back = untransform_w(transform_w(u, v, ctx1), v, ctx1);
  for (int i = 0; i < g.n; ++i)
    CHECK(std::abs(back[i] - u[i]) <= 1e-13 * std::max(1.0, std::abs(u[i])));
}

TEST_CASE("transformed residual vanishes on the prey-only state") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 128);
  ModelContext ctx(params);
  SemitrivialStates s = semitrivial_states(params, g);
  REQUIRE(s.prey_only.has_value());
  Field zero(g);
  auto [r1, r2] = residual_w(zero, s.prey_only->theta, params.lambda, ctx);
  CHECK(r1.sup_norm() <= 1e-10);
  CHECK(r2.sup_norm() <= 1e-10);
}

TEST_CASE("the two residual forms share their coexistence root to second order") {
  ModelParams params = oracles::figure2_params();

  auto root_gap = [&](int n) {
    Grid g = build_grid(4.0, n);
    ModelContext ctx(params);
    // first-order branch predictor at lambda = 1.5 seeds the coexistence basin
    BifurcationBundle b = lambda_mu_bundle(params, g);
    double s = (1.5 - b.lambda_mu) / b.lambda_prime0;
    Field u0 = s * b.phi;
    Field v0 = b.omega + s * b.psi;

    SteadyState wroot = newton_solve(u0, v0, 1.5, ctx);
    REQUIRE(wroot.kind == StateKind::coexistence);
    auto [w1, w2] =
        residual_w(transform_w(wroot.u, wroot.v, ctx), wroot.v, 1.5, ctx);
    CHECK(w1.sup_norm() <= 1e-8);
    CHECK(w2.sup_norm() <= 1e-8);

    auto uv = oracles::newton_uv(wroot.u, wroot.v, 1.5, params);
    REQUIRE(uv.has_value());
    auto [r1, r2] = residual(uv->first, uv->second, 1.5, params);
    CHECK(r1.sup_norm() <= 1e-8);
    CHECK(r2.sup_norm() <= 1e-8);

    return std::max(sup_distance(wroot.u, uv->first),
                    sup_distance(wroot.v, uv->second));
  };

  double gap64 = root_gap(64);
  double gap128 = root_gap(128);
  CHECK(gap128 < gap64);
  CHECK(gap64 / gap128 >= 2.5); // second-order shrink, nominal factor 4
}

TEST_CASE("analytic jacobians match central differences") {
  ModelParams params = oracles::figure2_params();
  params.motility = rational_motility(0.8, 1.0, 0.7);
  Grid g = build_grid(4.0, 96);
  ModelContext ctx(params);
  std::mt19937_64 rng(53);

  Field u = oracles::random_dirichlet_bump(g, rng, 0.8);
  Field v = oracles::random_dirichlet_bump(g, rng, 1.4);
  const double lambda = 1.2, eps = 1e-6;

  BlockJacobian J = jacobian(u, v, lambda, params);
  auto R = [&](const Field& a, const Field& b) {
    return residual(a, b, lambda, params);
  };
  Field w = transform_w(u, v, ctx);
  BlockJacobian Jw = jacobian_w(w, v, lambda, ctx);
  auto Rw = [&](const Field& a, const Field& b) {
    return residual_w(a, b, lambda, ctx);
  };

  for (int trial = 0; trial < 20; ++trial) {
    Field d1 = oracles::random_smooth_field(g, rng, -1.0, 1.0);
    Field d2 = oracles::random_smooth_field(g, rng, -1.0, 1.0);

    auto [a1, a2] = J.apply(d1, d2);
    auto [f1, f2] = oracles::central_difference(R, u, v, d1, d2, eps);
    double scale = std::max({a1.sup_norm(), a2.sup_norm(), 1.0});
    CHECK(sup_distance(a1, f1) <= 1e-5 * scale);
    CHECK(sup_distance(a2, f2) <= 1e-5 * scale);

    auto [b1, b2] = Jw.apply(d1, d2);
    auto [h1, h2] = oracles::central_difference(Rw, w, v, d1, d2, eps);
    double wscale = std::max({b1.sup_norm(), b2.sup_norm(), 1.0});
    CHECK(sup_distance(b1, h1) <= 1e-5 * wscale);
    CHECK(sup_distance(b2, h2) <= 1e-5 * wscale);
  }
}

TEST_CASE("jacobian blocks decouple at the trivial state") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 48);
  Field zero(g);
  BlockJacobian J = jacobian(zero, zero, params.lambda, params);

  for (double val : J.a21) CHECK(val == 0.0);

  TridiagonalOperator lap_u = assemble_div_form(
      Coefficient(params.motility.d(0.0)), Coefficient(-params.lambda), g);
  TridiagonalOperator lap_v =
      assemble_div_form(Coefficient(params.D), Coefficient(-params.mu), g);
  Field probe = map_field(g, [&](double x) { return std::sin(x) + 0.3; });
  Field zero_probe(g);

  auto [ju, jv] = J.apply(probe, zero_probe);
  CHECK(sup_distance(ju, lap_u.apply(probe)) <= 1e-12 * lap_u.row_sum_norm());
  CHECK(jv.sup_norm() <= 1e-14 * lap_v.row_sum_norm());

  auto [ku, kv] = J.apply(zero_probe, probe);
  CHECK(ku.sup_norm() <= 1e-14 * lap_u.row_sum_norm());
  CHECK(sup_distance(kv, lap_v.apply(probe)) <= 1e-12 * lap_v.row_sum_norm());
}

TEST_CASE("predator-to-prey coupling vanishes on the predator-only state") {
  ModelParams params = oracles::figure2_params();
  params.lambda = 5.0;
  Grid g = build_grid(4.0, 96);
  SemitrivialStates s = semitrivial_states(params, g);
  REQUIRE(s.predator_only.has_value());
  Field zero(g);
  BlockJacobian J = jacobian(s.predator_only->theta, zero, params.lambda, params);
  for (double val : J.a21) CHECK(val == 0.0); // diag(F(0)) = 0
}

TEST_CASE("newton collapses to the predator-only root from a skewed start") {
  ModelParams params = oracles::figure2_params();
  params.lambda = 5.0;
  Grid g = build_grid(4.0, 128);
  SemitrivialStates s = semitrivial_states(params, g);
  REQUIRE(s.predator_only.has_value());
  REQUIRE(s.prey_only.has_value());

  Field u0 = 0.9 * s.predator_only->theta;
  Field v0 = 1e-3 * s.prey_only->theta;
  SteadyState root = newton_solve(u0, v0, 5.0, params);
  CHECK(root.kind == StateKind::predator_only);
  CHECK_FALSE(root.positive);
  CHECK(sup_distance(root.u, s.predator_only->theta) <= 1e-6);
}

TEST_CASE("newton lands on a small coexistence root near the bifurcation point") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 128);
  BifurcationBundle b = lambda_mu_bundle(params, g);

  double s = 0.05;
  double lam = b.lambda_mu + s * b.lambda_prime0;
  Field u0 = s * b.phi;
  Field v0 = b.omega + s * b.psi;
  SteadyState root = newton_solve(u0, v0, lam, params);
  CHECK(root.kind == StateKind::coexistence);
  CHECK(root.positive);
  CHECK(root.u.max() < 0.5);
  CHECK(root.residual_norm <= 1e-8);
}

TEST_CASE("positive roots respect the a-priori box") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 128);
  ModelContext ctx(params);

  BifurcationBundle b = lambda_mu_bundle(params, g);
  double s = (1.5 - b.lambda_mu) / b.lambda_prime0;
  SteadyState root = newton_solve(s * b.phi, b.omega + s * b.psi, 1.5, ctx);
  REQUIRE(root.positive);
  double u_cap = std::exp(ctx.g_mu) *
                 (std::abs(root.lambda) + params.gamma * ctx.max_F_on_0_mu);
  CHECK(root.v.max() <= params.mu * (1.0 + 1e-8));
  CHECK(root.u.max() <= u_cap * (1.0 + 1e-8));
}

TEST_CASE("box violations raise the internal invariant error") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 32);
  ModelContext ctx(params);
  Field u(g, 100.0);
  Field v(g, 1.0);
  CHECK_THROWS_AS(enforce_box_bounds(u, v, 1.5, ctx), Error);
  try {
    enforce_box_bounds(u, v, 1.5, ctx);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::internal);
    CHECK(e.kind() == "box-bound");
  }

  Field u_ok(g, 0.1);
  Field v_big(g, 3.0); // above mu = 2
  CHECK_THROWS_AS(enforce_box_bounds(u_ok, v_big, 1.5, ctx), Error);
}

TEST_CASE("newton failure carries its residual history") {
  ModelParams params = oracles::figure2_params();
  Grid g = build_grid(4.0, 64);
  Field u0(g, 1e6);
  Field v0(g, 1e6);
  NewtonOptions opts;
  opts.max_iter = 3;
  bool threw = false;
  try {
    newton_solve(u0, v0, 1.5, params, opts);
  } catch (const ConvergenceError& e) {
    threw = true;
    CHECK_FALSE(e.residual_history().empty());
    CHECK(e.exit_code() == 3);
  }
  CHECK(threw);
}

TEST_CASE("folded taxis: both discretizations find the same coexistence state") {
  // With chi = -d' the transformed diffusion coefficient d e^g is constant,
  // so the two residual forms discretize one flux two ways; their roots must
  // coincide to discretization accuracy on a fine grid.
  ModelParams params = oracles::figure2_params();
  params.motility = folded_motility();
  Grid g = build_grid(4.0, 6000);
  ModelContext ctx(params);

  BifurcationBundle b = lambda_mu_bundle(params, g);
  double s = 0.3;
  double lam = b.lambda_mu + s * b.lambda_prime0;
  Field u0 = s * b.phi;
  Field v0 = b.omega + s * b.psi;

  SteadyState wroot = newton_solve(u0, v0, lam, ctx);
  REQUIRE(wroot.kind == StateKind::coexistence);

  auto uv = oracles::newton_uv(wroot.u, wroot.v, lam, params);
  REQUIRE(uv.has_value());
  auto [r1, r2] = residual(uv->first, uv->second, lam, params);
  CHECK(std::max(r1.sup_norm(), r2.sup_norm()) <= 1e-9);

  CHECK(sup_distance(wroot.u, uv->first) <= 1e-7);
  CHECK(sup_distance(wroot.v, uv->second) <= 1e-7);
}

} // TEST_SUITE
