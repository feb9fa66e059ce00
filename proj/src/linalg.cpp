#include "preytaxis/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "preytaxis/errors.hpp"

namespace preytaxis::linalg {

std::vector<double> solve_tridiagonal(const std::vector<double>& sub,
                                      const std::vector<double>& diag,
                                      const std::vector<double>& super,
                                      std::vector<double> rhs) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> scratch(2 * static_cast<size_t>(n));
  solve_tridiagonal_inplace(sub.data(), diag.data(), super.data(), rhs.data(), n,
                            scratch.data());
  return rhs;
}

void solve_tridiagonal_inplace(const double* sub, const double* diag,
                               const double* super, double* rhs, int n,
                               double* scratch) {
  // Forward sweep
  double* c = scratch;     // modified superdiagonal
  double* d = scratch + n; // modified diagonal
  d[0] = diag[0];
  if (n > 1) c[0] = super[0];
  for (int i = 1; i < n; ++i) {
    const double m = sub[i - 1] / d[i - 1];
    d[i] = diag[i] - m * c[i - 1];
    if (i < n - 1) c[i] = super[i];
    rhs[i] -= m * rhs[i - 1];
  }
  // Back substitution
  rhs[n - 1] /= d[n - 1];
  for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / d[i];
}

std::vector<double> solve_tridiagonal_pivoting(const std::vector<double>& sub,
                                               const std::vector<double>& diag,
                                               const std::vector<double>& super,
                                               std::vector<double> rhs) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> a(n, 0.0), b = diag, c(n, 0.0), e(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    a[i] = sub[i];   // row i+1, column i
    c[i] = super[i]; // row i, column i+1
  }
  // Elimination down column k with row interchange when the subdiagonal
  // dominates; fill appears in e (second superdiagonal).
  for (int k = 0; k + 1 < n; ++k) {
    if (std::abs(a[k]) > std::abs(b[k])) {
      std::swap(b[k], a[k]);
      double t = c[k];
      c[k] = b[k + 1];
      b[k + 1] = t;
      if (k + 2 < n) {
        t = e[k];
        e[k] = c[k + 1];
        c[k + 1] = t;
      }
      std::swap(rhs[k], rhs[k + 1]);
    }
    if (b[k] == 0.0) throw internal_error("singular", "tridiagonal solve hit a zero pivot");
    const double m = a[k] / b[k];
    b[k + 1] -= m * c[k];
    if (k + 2 < n) c[k + 1] -= m * e[k];
    rhs[k + 1] -= m * rhs[k];
  }
  if (b[n - 1] == 0.0) throw internal_error("singular", "tridiagonal solve hit a zero pivot");
  rhs[n - 1] /= b[n - 1];
  if (n > 1) rhs[n - 2] = (rhs[n - 2] - c[n - 2] * rhs[n - 1]) / b[n - 2];
  for (int i = n - 3; i >= 0; --i)
    rhs[i] = (rhs[i] - c[i] * rhs[i + 1] - e[i] * rhs[i + 2]) / b[i];
  return rhs;
}

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku),
      a_(static_cast<size_t>(2 * kl + ku + 1) * n, 0.0), piv_(n, 0) {
  if (n <= 0 || kl < 0 || ku < 0) throw std::invalid_argument("bad band shape");
}

bool BandedMatrix::in_band(int i, int j) const {
  return i >= 0 && j >= 0 && i < n_ && j < n_ && j - i <= ku_ && i - j <= kl_;
}

double& BandedMatrix::at(int i, int j) {
  if (!in_band(i, j)) throw std::out_of_range("band entry outside bandwidth");
  return entry(i, j);
}

double BandedMatrix::at(int i, int j) const {
  if (!in_band(i, j)) return 0.0;
  return entry(i, j);
}

bool BandedMatrix::factor() {
  // Row-pivoted band LU; the upper bandwidth grows to kl + ku with fill.
  const int kw = kl_ + ku_; // widest reach of a pivot row after interchanges
  for (int k = 0; k < n_; ++k) {
    int p = k;
    double best = std::abs(entry(k, k));
    for (int i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i) {
      const double v = std::abs(entry(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    piv_[k] = p;
    if (best == 0.0) return false;
    if (p != k) {
      for (int j = k; j <= std::min(n_ - 1, k + kw); ++j)
        std::swap(entry(k, j), entry(p, j));
    }
    const double pivot = entry(k, k);
    for (int i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i) {
      const double m = entry(i, k) / pivot;
      entry(i, k) = m;
      for (int j = k + 1; j <= std::min(n_ - 1, k + kw); ++j)
        entry(i, j) -= m * entry(k, j);
    }
  }
  factored_ = true;
  return true;
}

std::vector<double> BandedMatrix::solve(std::vector<double> rhs) const {
  if (!factored_) throw std::logic_error("solve before factor");
  const int kw = kl_ + ku_;
  for (int k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(rhs[k], rhs[piv_[k]]);
    for (int i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i)
      rhs[i] -= entry(i, k) * rhs[k];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j <= std::min(n_ - 1, i + kw); ++j) s -= entry(i, j) * rhs[j];
    rhs[i] = s / entry(i, i);
  }
  return rhs;
}

bool dense_solve(std::vector<double> a, int n, std::vector<double>& rhs) {
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
  std::vector<int> piv(n);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(at(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    piv[k] = p;
    if (best == 0.0) return false;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
    for (int i = k + 1; i < n; ++i) {
      const double m = at(i, k) / at(k, k);
      at(i, k) = m;
      for (int j = k + 1; j < n; ++j) at(i, j) -= m * at(k, j);
    }
  }
  for (int k = 0; k < n; ++k) {
    if (piv[k] != k) std::swap(rhs[k], rhs[piv[k]]);
    for (int i = k + 1; i < n; ++i) rhs[i] -= at(i, k) * rhs[k];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= at(i, j) * rhs[j];
    rhs[i] = s / at(i, i);
  }
  return true;
}

} // namespace preytaxis::linalg
