#pragma once

// Direct solvers for the small structured systems the discretization produces:
// tridiagonal (with and without pivoting), general banded LU with partial
// pivoting, and a dense LU used as the fallback for bordered systems.

#include <vector>

namespace preytaxis::linalg {

// Thomas algorithm, no pivoting. sub/super have n-1 entries, diag has n.
// Safe for diagonally dominant or positive definite systems.
std::vector<double> solve_tridiagonal(const std::vector<double>& sub,
                                      const std::vector<double>& diag,
                                      const std::vector<double>& super,
                                      std::vector<double> rhs);

// In-place variant for hot loops; scratch must have >= 2n entries.
void solve_tridiagonal_inplace(const double* sub, const double* diag,
                               const double* super, double* rhs, int n,
                               double* scratch);

// Tridiagonal LU with partial pivoting (one extra superdiagonal of fill).
// Safe for the indefinite shifted systems of eigenvalue iterations.
std::vector<double> solve_tridiagonal_pivoting(const std::vector<double>& sub,
                                               const std::vector<double>& diag,
                                               const std::vector<double>& super,
                                               std::vector<double> rhs);

// Banded matrix with kl sub- and ku super-diagonals, LAPACK-style storage
// with kl extra rows for pivoting fill.
class BandedMatrix {
public:
  BandedMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  double& at(int i, int j);
  double at(int i, int j) const;
  bool in_band(int i, int j) const;

  // LU with partial pivoting, in place. Returns false on a zero pivot.
  bool factor();
  bool factored() const { return factored_; }
  std::vector<double> solve(std::vector<double> rhs) const;

private:
  int n_, kl_, ku_;
  std::vector<double> a_; // (2*kl + ku + 1) rows by n columns
  std::vector<int> piv_;
  bool factored_ = false;

  double& entry(int i, int j) { return a_[static_cast<size_t>(kl_ + ku_ + i - j) * n_ + j]; }
  double entry(int i, int j) const { return a_[static_cast<size_t>(kl_ + ku_ + i - j) * n_ + j]; }
};

// Dense LU with partial pivoting; solves A x = b, overwriting a copy of A.
// Returns false on a zero pivot.
bool dense_solve(std::vector<double> a, int n, std::vector<double>& rhs);

} // namespace preytaxis::linalg
