#pragma once

#include <vector>

#include "cplab/types.hpp"

namespace cplab {

/// Exact binomial coefficient; throws Overflow if it leaves 64-bit range.
long long binomial(int n, int k);

/// A multi-homogeneous structure: variable groups of projective dimension k_j
/// and one multi-degree row per equation.
struct MultiHomStructure {
  std::vector<int> group_sizes;                    // k_j
  std::vector<std::vector<long long>> degree_rows;  // d_i, one row per equation
};

struct BezoutResult {
  long long bezout_number = 0;
  MultiHomStructure structure;
};

/// Coefficient of prod_j zeta_j^{k_j} in prod_i (sum_j d_ij zeta_j), computed
/// exactly over a truncated dense multi-degree array. Requires sum_j k_j to
/// equal the number of rows (square system); throws NonSquare otherwise and
/// Overflow if a coefficient leaves 64-bit range.
BezoutResult bezout_number(const MultiHomStructure& s);

/// Bi-homogeneous structure of the velocity/hyperplane intersection system for
/// an (m, n) problem: groups of sizes (m, m-n); m-n rows of degree (1,0),
/// m-1 rows of degree (1,1), and one flavor-dependent last row.
MultiHomStructure crossing_system_structure(int m, int n, Flavor f);

/// Closed-form crossing bounds per flavor and the count of mu = 0 roots that
/// the raw PD/D coefficients include.
struct CrossingBounds {
  long long B_pd = 0;   // 2n C(m-1, n)
  long long B_p = 0;    // 2(n-1) C(m-1, n)
  long long B_d = 0;    // 2n C(m-1, n)
  long long spurious = 0;  // C(m, n)
};

CrossingBounds crossing_bounds(int m, int n);

}  // namespace cplab
