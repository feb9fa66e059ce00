#pragma once

// Uniform interior-node grid on (0, L) with homogeneous Dirichlet boundaries,
// nodal fields, the conservative second-order divergence-form operator
//
//   (A phi)_i = [p_{i+1/2}(phi_i - phi_{i+1}) + p_{i-1/2}(phi_i - phi_{i-1})]/h^2 + q_i phi_i,
//
// face coefficients by arithmetic averaging, and the quadrature utilities
// shared by every solver.

#include <functional>
#include <vector>

#include "preytaxis/linalg.hpp"

namespace preytaxis {

struct Grid {
  double length = 0; // domain (0, length)
  int n = 0;         // interior nodes x_i = i h, i = 1..n; boundaries never stored
  double h = 0;      // length / (n + 1)

  // 0-based storage index: node i lives at (i + 1) h.
  double x(int i) const { return h * (i + 1); }
};

// Throws invalid-argument unless length > 0 and n >= 3.
Grid build_grid(double length, int n);

bool same_grid(const Grid& a, const Grid& b);

struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.n, fill) {}
  Field(const Grid& g, std::vector<double> v);

  int size() const { return grid.n; }
  double& operator[](int i) { return values[i]; }
  double operator[](int i) const { return values[i]; }

  double max() const;
  double min() const;
  double sup_norm() const; // max |value|
};

Field map_field(const Grid& g, const std::function<double(double)>& f);

// Componentwise helpers; grids must match.
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
double sup_distance(const Field& a, const Field& b);

// Nodal coefficient with explicit boundary values. Boundary values come from
// evaluating the coefficient function at the boundary state (v = 0 for the
// state-dependent coefficients), never from extrapolating the field.
struct Coefficient {
  std::vector<double> nodal; // size n; empty means constant
  double constant = 0;
  double left = 0, right = 0;

  Coefficient() = default;
  Coefficient(double c) : constant(c), left(c), right(c) {}
  static Coefficient from_nodal(std::vector<double> values, double left, double right);

  bool is_constant() const { return nodal.empty(); }
  double at(int i) const { return nodal.empty() ? constant : nodal[i]; }
  double boundary_left() const { return nodal.empty() ? constant : left; }
  double boundary_right() const { return nodal.empty() ? constant : right; }
  double max_abs() const;
  double min_value(int n) const;
};

struct TridiagonalOperator {
  std::vector<double> sub;   // n-1: couples row i+1 with column i
  std::vector<double> diag;  // n
  std::vector<double> super; // n-1: couples row i with column i+1

  int size() const { return static_cast<int>(diag.size()); }
  std::vector<double> apply(const std::vector<double>& x) const;
  Field apply(const Field& x) const;
  // Largest absolute row sum; scale for residual tests.
  double row_sum_norm() const;
  // Thomas solve (no pivoting); for SPD / diagonally dominant systems.
  std::vector<double> solve(std::vector<double> rhs) const;
  // Pivoting solve for indefinite shifts.
  std::vector<double> solve_pivoting(std::vector<double> rhs) const;
};

// Assembles the divergence-form operator above. Face values of p average the
// two adjacent nodal values; faces touching the boundary average the interior
// nodal value with p's boundary value. sub and super are assigned from the
// same expression, so symmetry is bitwise.
TridiagonalOperator assemble_div_form(const Coefficient& p, const Coefficient& q,
                                      const Grid& grid);

// Trapezoid rule over [0, L] for integrands vanishing at the boundary:
// h * sum of interior nodal values.
double integrate(const Field& f);

// Nodal derivative under Dirichlet data: centered differences at interior
// nodes, one-sided second-order stencils at the first and last interior node.
Field dirichlet_gradient(const Field& f);

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol);

// Antiderivative table for g(v) = int_0^v chi(t)/d(t) dt on [0, cap]:
// per-cell adaptive Simpson accumulated with compensated summation, linear
// interpolation between nodes (node spacing chosen so interpolation error
// stays below 1e-10 relative), direct quadrature beyond the cap, linear
// extension with slope chi(0)/d(0) below zero (Newton iterates may
// transiently undershoot).
class GTable {
public:
  GTable(std::function<double(double)> d, std::function<double(double)> chi,
         double cap);

  double operator()(double v) const;
  Field operator()(const Field& v) const;
  double cap() const { return cap_; }

private:
  std::function<double(double)> d_, chi_;
  double cap_ = 0, dv_ = 0, slope0_ = 0;
  std::vector<double> table_;

  double integrand(double t) const { return chi_(t) / d_(t); }
};

// Convenience wrapper: builds a table sized to 1.25 * max(sup v, 1) and maps
// the field through it.
Field quadrature_g(const std::function<double(double)>& d,
                   const std::function<double(double)>& chi, const Field& v);

} // namespace preytaxis
