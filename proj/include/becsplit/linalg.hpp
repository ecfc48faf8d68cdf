#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace becsplit::linalg {

// Dense symmetric matrix helpers for the tiny (<= 8x8) systems this project
// needs; everything is deterministic, no pivot randomness.

// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
// `a` is row-major n*n and is taken by value (destroyed internally).
std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t n);

// Solve A x = b for symmetric positive definite A (row-major n*n) via
// Cholesky. Returns false when A is not numerically positive definite.
bool solve_spd(const std::vector<double>& a, const std::vector<double>& b,
               std::size_t n, std::vector<double>* x);

// Tridiagonal solve (Thomas algorithm) for systems with constant -2 diagonal
// plus 1 off-diagonals scaled externally; lower/diag/upper given explicitly.
// Overwrites rhs with the solution. Returns false on a zero pivot.
bool solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                       std::vector<double> upper, std::vector<double>* rhs);

}  // namespace becsplit::linalg
