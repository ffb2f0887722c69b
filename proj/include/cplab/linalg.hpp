#pragma once

#include "cplab/types.hpp"

namespace cplab {

struct SolveResult {
  Vector x;
  double cond_estimate = 0.0;    // 1-norm condition estimate
  bool ill_conditioned = false;  // cond_estimate exceeded tol.cond_cap
};

/// Dense LU solve with partial pivoting and one step of iterative refinement.
/// Throws SingularMatrix when no usable pivot exists.
SolveResult linear_solve(const Matrix& M, const Vector& rhs, const Tolerances& tol);

/// Orthonormal basis of ker(A^T), as the m x (m-n) trailing block of the full
/// Q factor of A. Column order is deterministic for a fixed input.
Matrix null_space_basis(const Matrix& A, const Tolerances& tol);

/// Minimum-norm f with A^T f = c.
Vector particular_solution(const Matrix& A, const Vector& c, const Tolerances& tol);

/// sigma_min / sigma_max of A; zero for an empty matrix.
double spectral_rank_ratio(const Matrix& A);

}  // namespace cplab
