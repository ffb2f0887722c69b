#pragma once

#include "cplab/types.hpp"

namespace cplab {

/// Outcome of a dense tableau simplex run.
struct SimplexResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Optimal;
  double objective = 0.0;
  Vector x;  // structural variables at the final basis
  int iterations = 0;
};

/// Maximize obj.v subject to G v <= h, v >= 0.
///
/// Two-phase dense tableau with Bland's rule throughout, so the pivot sequence
/// is deterministic and cycle-free. Intended for the small classification
/// problems of this lab (tens of rows), not for production LP sizes.
SimplexResult simplex_maximize(const Matrix& G, const Vector& h, const Vector& obj);

}  // namespace cplab
