#pragma once

#include "kmp/types.hpp"

namespace kmp {

// d smallest eigenpairs of the symmetric-definite pencil (A, B + mu I).
struct EigenSolution {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // N x d; p_j^T (B + mu I) p_j = 1/d
  Vector residuals;     // ||A p_j - lambda_j (B + mu I) p_j||
  double shift = 0.0;   // mu = ridge * trace(B) / N
};

// Cholesky reduction of the regularised pencil to a standard symmetric
// eigenproblem. Column scaling spreads the unit trace constraint
// tr(P^T B P) = 1 evenly over the d columns; each column is then signed so its
// largest-magnitude entry is positive.
EigenSolution solve_gep(const Matrix& a, const Matrix& b, Index d, double ridge = 1e-8);

}  // namespace kmp
