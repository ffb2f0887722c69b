#pragma once

#include <cstdint>

#include "cplab/types.hpp"

namespace cplab {

/// Draws an instance with i.i.d. standard Gaussian entries. Resamples wholesale
/// until every LpInstance invariant holds; deterministic per seed. The number
/// of discarded draws can be inspected through retries_out.
LpInstance sample_instance(int m, int n, std::uint64_t seed, const Tolerances& tol,
                           int retry_cap = 64, int* retries_out = nullptr);

}  // namespace cplab
