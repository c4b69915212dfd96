#pragma once

#include <vector>

#include "csid/matrix.hpp"

namespace csid {

// A^t with A square; t = 0 gives the identity.
Matrix matrix_power(const Matrix& a, unsigned t);

// 0.5 * (S + S^T)
Matrix symmetrize(const Matrix& s);

// Eigenvalues of a symmetric matrix, ascending. Cyclic Jacobi rotations;
// intended for the small (<= ~16x16) matrices this library works with.
std::vector<double> symmetric_eigenvalues(const Matrix& s);

// Largest singular value. Formed from the eigenvalues of the smaller of
// M M^T / M^T M.
double spectral_norm(const Matrix& m);

// Solves S X = B for X with S symmetric positive definite, via Cholesky.
// Throws DegeneracyError on a non-positive pivot.
Matrix solve_spd(const Matrix& s, const Matrix& b);

} // namespace csid
