#include "cplab/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace cplab {

double spectral_rank_ratio(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (smax == 0.0) return 0.0;
  return sv(sv.size() - 1) / smax;
}

void LpInstance::validate(const Tolerances& tol) const {
  require(n >= 1 && m > n, Errc::BadDims, "need m > n >= 1");
  require(A.rows() == m && A.cols() == n, Errc::DimensionMismatch, "A must be m x n");
  require(b.size() == m, Errc::DimensionMismatch, "b must have length m");
  require(c.size() == n, Errc::DimensionMismatch, "c must have length n");
  require(A.allFinite() && b.allFinite() && c.allFinite(), Errc::InvalidArgument,
          "non-finite instance data");
  require(c.norm() > 0.0, Errc::InvalidArgument, "c must be non-zero");
  for (int i = 0; i < m; ++i)
    require(A.row(i).cwiseAbs().maxCoeff() > 0.0, Errc::InvalidArgument,
            "row of A is identically zero");
  require(spectral_rank_ratio(A) > tol.rank_tol, Errc::RankDeficient,
          "A is numerically rank deficient");
}

SolveResult linear_solve(const Matrix& M, const Vector& rhs, const Tolerances& tol) {
  require(M.rows() == M.cols(), Errc::DimensionMismatch, "matrix must be square");
  require(M.rows() == rhs.size(), Errc::DimensionMismatch, "rhs size mismatch");
  require(M.allFinite() && rhs.allFinite(), Errc::InvalidArgument, "non-finite input");

  Eigen::PartialPivLU<Matrix> lu(M);
  const Vector udiag = lu.matrixLU().diagonal();
  const double umax = udiag.cwiseAbs().maxCoeff();
  const double umin = udiag.cwiseAbs().minCoeff();
  if (umax == 0.0 || umin <= umax * 1e-300)
    fail(Errc::SingularMatrix, "no usable pivot");

  SolveResult out;
  out.x = lu.solve(rhs);
  // one refinement step keeps the residual near machine level
  out.x += lu.solve(rhs - M * out.x);

  const double rc = lu.rcond();
  out.cond_estimate = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.cond_estimate > tol.cond_cap;
  return out;
}

namespace {

void check_full_column_rank(const Matrix& A, const Tolerances& tol) {
  require(A.rows() > 0 && A.cols() > 0, Errc::BadDims, "empty matrix");
  require(A.rows() >= A.cols(), Errc::BadDims, "need at least as many rows as columns");
  require(spectral_rank_ratio(A) > tol.rank_tol, Errc::RankDeficient,
          "matrix is numerically rank deficient");
}

}  // namespace

Matrix null_space_basis(const Matrix& A, const Tolerances& tol) {
  check_full_column_rank(A, tol);
  const auto m = A.rows();
  const auto n = A.cols();
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(m, m);
  return Q.rightCols(m - n);
}

Vector particular_solution(const Matrix& A, const Vector& c, const Tolerances& tol) {
  check_full_column_rank(A, tol);
  require(A.cols() == c.size(), Errc::DimensionMismatch, "c size mismatch");
  const auto n = A.cols();
  Eigen::HouseholderQR<Matrix> qr(A);
  // minimum-norm solutions of A^T f = c live in im(A) = im(Q1): f = Q1 R^-T c
  Matrix R = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
  Vector z = R.transpose().triangularView<Eigen::Lower>().solve(c);
  Matrix Q1 = qr.householderQ() * Matrix::Identity(A.rows(), n);
  return Q1 * z;
}

}  // namespace cplab
