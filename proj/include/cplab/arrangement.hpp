#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cplab/types.hpp"

namespace cplab {

enum class PrimalStatus { Empty, Degenerate, UnboundedFeasible, BoundedStrict };

inline const char* to_string(PrimalStatus s) {
  switch (s) {
    case PrimalStatus::Empty: return "Empty";
    case PrimalStatus::Degenerate: return "Degenerate";
    case PrimalStatus::UnboundedFeasible: return "UnboundedFeasible";
    case PrimalStatus::BoundedStrict: return "BoundedStrict";
  }
  return "?";
}

/// Classification of one sign-condition cell.
struct CellReport {
  SignVector eps;
  PrimalStatus primal_status = PrimalStatus::Empty;
  bool dual_strict = false;
  bool jointly_strict = false;
  std::optional<Vector> witness_x;
  std::optional<Vector> witness_gamma;
  bool condition_flag = false;
};

struct ArrangementSummary {
  int m = 0;
  int n = 0;
  long long bounded_strict_count = 0;
  long long buck_expected = 0;  // C(m-1, n)
  long long joint_count = 0;
  long long joint_expected = 0;  // C(m, n)
  long long degenerate_count = 0;
  long long empty_count = 0;
  long long unbounded_count = 0;
  std::vector<CellReport> per_cell;  // enumeration order, 2^m entries
};

/// Applies the diagonal sign action: (A, b, c) -> (D_eps A, D_eps b, c).
LpInstance apply_sign(const LpInstance& inst, const SignVector& eps);

/// Strictness decided by phase 1; boundedness is a separate question.
enum class FeasibilityKind { Empty, Degenerate, StrictlyFeasible };

/// Phase-1 classification of the cell {eps_i (A_i x - b_i) > 0}: maximizes the
/// margin t inside an artificial box and thresholds the optimum at feas_margin.
std::pair<FeasibilityKind, std::optional<Vector>> primal_feasibility(const LpInstance& inst,
                                                                     const SignVector& eps,
                                                                     const Tolerances& tol);

/// True iff the recession cone {d : eps_i A_i d >= 0} is {0}; decided by the 2n
/// programs maximizing +-d_j over the cone intersected with the unit box.
bool is_bounded(const LpInstance& inst, const SignVector& eps, const Tolerances& tol);

/// Null-space parametrization of the dual feasible set: y = f + G gamma.
struct DualBasis {
  Vector f;  // minimum-norm solution of A^T f = c
  Matrix G;  // orthonormal basis of ker A^T
};

DualBasis dual_basis(const LpInstance& inst, const Tolerances& tol);

std::pair<bool, std::optional<Vector>> dual_strict_feasibility(const LpInstance& inst,
                                                               const SignVector& eps,
                                                               const DualBasis& basis,
                                                               const Tolerances& tol);

std::pair<bool, std::optional<Vector>> dual_strict_feasibility(const LpInstance& inst,
                                                               const SignVector& eps,
                                                               const Tolerances& tol);

/// Classifies all 2^m sign vectors in binary counting order.
/// Throws CapExceeded when m exceeds cell_cap_exponent.
ArrangementSummary enumerate_cells(const LpInstance& inst, const Tolerances& tol,
                                   int cell_cap_exponent = 20);

}  // namespace cplab
