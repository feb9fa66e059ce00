#include "preytaxis/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "preytaxis/errors.hpp"

namespace preytaxis {

Grid build_grid(double length, int n) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw precondition_error("invalid-argument", "grid length must be positive");
  if (n < 3) throw precondition_error("invalid-argument", "grid needs at least 3 interior nodes");
  Grid g;
  g.length = length;
  g.n = n;
  g.h = length / (n + 1);
  return g;
}

bool same_grid(const Grid& a, const Grid& b) { return a.length == b.length && a.n == b.n; }

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (static_cast<int>(values.size()) != g.n)
    throw precondition_error("invalid-argument", "field size does not match grid");
}

double Field::max() const { return *std::max_element(values.begin(), values.end()); }
double Field::min() const { return *std::min_element(values.begin(), values.end()); }

double Field::sup_norm() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Field map_field(const Grid& g, const std::function<double(double)>& f) {
  Field out(g);
  for (int i = 0; i < g.n; ++i) out[i] = f(g.x(i));
  return out;
}

static void require_same(const Field& a, const Field& b) {
  if (!same_grid(a.grid, b.grid))
    throw precondition_error("invalid-argument", "fields live on different grids");
}

Field operator+(const Field& a, const Field& b) {
  require_same(a, b);
  Field out = a;
  for (int i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Field operator-(const Field& a, const Field& b) {
  require_same(a, b);
  Field out = a;
  for (int i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Field operator*(double s, const Field& a) {
  Field out = a;
  for (double& v : out.values) v *= s;
  return out;
}

double sup_distance(const Field& a, const Field& b) {
  require_same(a, b);
  double m = 0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Coefficient Coefficient::from_nodal(std::vector<double> values, double left, double right) {
  Coefficient c;
  c.nodal = std::move(values);
  c.left = left;
  c.right = right;
  return c;
}

double Coefficient::max_abs() const {
  if (is_constant()) return std::abs(constant);
  double m = std::max(std::abs(left), std::abs(right));
  for (double v : nodal) m = std::max(m, std::abs(v));
  return m;
}

double Coefficient::min_value(int n) const {
  if (is_constant()) return constant;
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) m = std::min(m, nodal[i]);
  return m;
}

std::vector<double> TridiagonalOperator::apply(const std::vector<double>& x) const {
  const int n = size();
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += sub[i - 1] * x[i - 1];
    if (i < n - 1) s += super[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

Field TridiagonalOperator::apply(const Field& x) const {
  return Field(x.grid, apply(x.values));
}

double TridiagonalOperator::row_sum_norm() const {
  const int n = size();
  double m = 0;
  for (int i = 0; i < n; ++i) {
    double s = std::abs(diag[i]);
    if (i > 0) s += std::abs(sub[i - 1]);
    if (i < n - 1) s += std::abs(super[i]);
    m = std::max(m, s);
  }
  return m;
}

std::vector<double> TridiagonalOperator::solve(std::vector<double> rhs) const {
  return linalg::solve_tridiagonal(sub, diag, super, std::move(rhs));
}

std::vector<double> TridiagonalOperator::solve_pivoting(std::vector<double> rhs) const {
  return linalg::solve_tridiagonal_pivoting(sub, diag, super, std::move(rhs));
}

TridiagonalOperator assemble_div_form(const Coefficient& p, const Coefficient& q,
                                      const Grid& grid) {
  const int n = grid.n;
  if (!p.is_constant() && static_cast<int>(p.nodal.size()) != n)
    throw precondition_error("invalid-argument", "coefficient p does not match grid");
  if (!q.is_constant() && static_cast<int>(q.nodal.size()) != n)
    throw precondition_error("invalid-argument", "coefficient q does not match grid");

  const double ih2 = 1.0 / (grid.h * grid.h);
  // face f sits between node f-1 and node f (node -1 and n are the boundary)
  std::vector<double> pface(n + 1);
  pface[0] = 0.5 * (p.boundary_left() + p.at(0));
  for (int f = 1; f < n; ++f) pface[f] = 0.5 * (p.at(f - 1) + p.at(f));
  pface[n] = 0.5 * (p.at(n - 1) + p.boundary_right());

  TridiagonalOperator op;
  op.diag.resize(n);
  op.sub.resize(n - 1);
  op.super.resize(n - 1);
  for (int i = 0; i < n; ++i) op.diag[i] = (pface[i] + pface[i + 1]) * ih2 + q.at(i);
  for (int i = 0; i < n - 1; ++i) {
    const double off = -pface[i + 1] * ih2;
    op.super[i] = off;
    op.sub[i] = off;
  }
  return op;
}

double integrate(const Field& f) {
  // trapezoid over [0, L]; the boundary values are zero by the Dirichlet
  // condition, so only interior nodes contribute
  double acc = 0, comp = 0;
  for (double v : f.values) {
    const double y = v - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return f.grid.h * acc;
}

Field dirichlet_gradient(const Field& f) {
  const int n = f.size();
  const double h = f.grid.h;
  Field out(f.grid);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return out;
}

namespace {

double simpson_panel(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fb, double fm, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_panel(f, a, fa, m, fm, flm);
  const double right = simpson_panel(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson_panel(f, a, fa, b, fb, fm);
  return sign * adaptive_simpson_rec(f, a, b, fa, fb, fm, whole, tol, 40);
}

GTable::GTable(std::function<double(double)> d, std::function<double(double)> chi,
               double cap)
    : d_(std::move(d)), chi_(std::move(chi)), cap_(cap) {
  if (!(cap_ > 0.0) || !std::isfinite(cap_))
    throw precondition_error("invalid-argument", "g-table cap must be positive");
  slope0_ = integrand(0.0);

  // Node spacing from a sampled bound on the integrand's slope, so that the
  // linear interpolation error dv^2 |s'| / 8 stays below 1e-11.
  double deriv = 0.25;
  {
    const int m = 512;
    double prev = slope0_;
    for (int k = 1; k <= m; ++k) {
      const double t = cap_ * k / m;
      const double s = integrand(t);
      deriv = std::max(deriv, std::abs(s - prev) / (cap_ / m));
      prev = s;
    }
  }
  double dv = std::sqrt(8.0e-11 / deriv);
  dv = std::min(dv, 2.0e-5);
  dv = std::max(dv, cap_ / 4194304.0);
  int cells = std::max(512, static_cast<int>(std::ceil(cap_ / dv)));
  dv_ = cap_ / cells;

  table_.resize(cells + 1);
  table_[0] = 0.0;
  double acc = 0, comp = 0; // compensated running sum of the cell integrals
  for (int k = 0; k < cells; ++k) {
    const double a = dv_ * k, b = dv_ * (k + 1);
    const double cell = adaptive_simpson([this](double t) { return integrand(t); }, a, b,
                                         1e-16 * std::max(1.0, std::abs(acc)));
    const double y = cell - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    table_[k + 1] = acc;
  }
}

double GTable::operator()(double v) const {
  if (!std::isfinite(v))
    throw precondition_error("invalid-argument", "g-table query is not finite");
  if (v <= 0.0) return slope0_ * v;
  if (v >= cap_) {
    if (v == cap_) return table_.back();
    return table_.back() +
           adaptive_simpson([this](double t) { return integrand(t); }, cap_, v,
                            1e-13 * std::max(1.0, v - cap_));
  }
  const double s = v / dv_;
  int k = static_cast<int>(s);
  if (k >= static_cast<int>(table_.size()) - 1) k = static_cast<int>(table_.size()) - 2;
  const double frac = s - k;
  return table_[k] + frac * (table_[k + 1] - table_[k]);
}

Field GTable::operator()(const Field& v) const {
  Field out(v.grid);
  for (int i = 0; i < v.size(); ++i) out[i] = (*this)(v[i]);
  return out;
}

Field quadrature_g(const std::function<double(double)>& d,
                   const std::function<double(double)>& chi, const Field& v) {
  const double cap = 1.25 * std::max(v.max(), 1.0);
  GTable table(d, chi, cap);
  return table(v);
}

} // namespace preytaxis
