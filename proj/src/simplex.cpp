#include "cplab/simplex.hpp"

#include <limits>
#include <vector>

namespace cplab {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;
constexpr int kMaxIters = 20000;

struct Tableau {
  Matrix A;            // r x N constraint coefficients in the current basis
  Vector rhs;          // r, kept >= 0
  Vector cost;         // N reduced costs (maximization: entering wants cost > 0)
  double shift = 0.0;  // objective value of the current basis
  std::vector<int> basis;        // r basic column indices
  std::vector<bool> blocked;     // columns barred from entering (artificials in phase 2)
  int iterations = 0;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  void pivot(int row, int col) {
    const double p = A(row, col);
    A.row(row) /= p;
    rhs[row] /= p;
    for (int i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double f = A(i, col);
      if (f != 0.0) {
        A.row(i) -= f * A.row(row);
        rhs[i] -= f * rhs[row];
        if (rhs[i] < 0.0 && rhs[i] > -1e-11) rhs[i] = 0.0;
      }
    }
    const double f = cost[col];
    if (f != 0.0) {
      cost -= f * A.row(row).transpose();
      shift += f * rhs[row];
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  // Bland: lowest-index improving column; lowest-index basic variable on ties.
  // Returns Optimal when no column improves, Unbounded when a column has no
  // positive entry.
  SimplexResult::Status iterate() {
    for (;;) {
      require(++iterations <= kMaxIters, Errc::LpCycleGuard, "simplex iteration cap hit");
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (blocked[static_cast<std::size_t>(j)]) continue;
        if (cost[j] > kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return SimplexResult::Status::Optimal;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double a = A(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs[i] / a;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return SimplexResult::Status::Unbounded;
      pivot(leave, enter);
    }
  }
};

}  // namespace

SimplexResult simplex_maximize(const Matrix& G, const Vector& h, const Vector& obj) {
  const int r = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  require(h.size() == r, Errc::DimensionMismatch, "h size mismatch");
  require(obj.size() == n, Errc::DimensionMismatch, "objective size mismatch");
  require(G.allFinite() && h.allFinite() && obj.allFinite(), Errc::InvalidArgument,
          "non-finite LP data");

  // Slack per row; artificial per negative-rhs row.
  std::vector<int> art_rows;
  for (int i = 0; i < r; ++i)
    if (h[i] < 0.0) art_rows.push_back(i);
  const int n_art = static_cast<int>(art_rows.size());
  const int N = n + r + n_art;

  Tableau t;
  t.A = Matrix::Zero(r, N);
  t.rhs = Vector::Zero(r);
  t.cost = Vector::Zero(N);
  t.basis.resize(static_cast<std::size_t>(r));
  t.blocked.assign(static_cast<std::size_t>(N), false);

  {
    int a = 0;
    for (int i = 0; i < r; ++i) {
      const double flip = h[i] < 0.0 ? -1.0 : 1.0;
      t.A.row(i).head(n) = flip * G.row(i);
      t.A(i, n + i) = flip;  // slack
      t.rhs[i] = flip * h[i];
      if (h[i] < 0.0) {
        t.A(i, n + r + a) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = n + r + a;
        ++a;
      } else {
        t.basis[static_cast<std::size_t>(i)] = n + i;
      }
    }
  }

  SimplexResult out;

  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials). With the artificials basic, the
    // objective written in nonbasic variables is -sum(rhs) + sum of their rows.
    for (int i : art_rows) {
      t.cost += t.A.row(i).transpose();
      t.shift -= t.rhs[i];
    }
    for (int k = 0; k < n_art; ++k) t.cost[n + r + k] = 0.0;

    const auto st = t.iterate();
    require(st == SimplexResult::Status::Optimal, Errc::LpCycleGuard,
            "phase 1 cannot be unbounded");
    if (t.shift < -1e-8) {
      out.status = SimplexResult::Status::Infeasible;
      out.iterations = t.iterations;
      return out;
    }
    // Drive any artificial still basic (at zero) out of the basis; a row with
    // no usable real pivot is redundant and its artificial can stay pinned.
    for (int i = 0; i < r; ++i) {
      if (t.basis[static_cast<std::size_t>(i)] < n + r) continue;
      for (int j = 0; j < n + r; ++j) {
        if (std::abs(t.A(i, j)) > kPivotTol) {
          t.pivot(i, j);
          break;
        }
      }
    }
    // Artificials stay out from here on.
    for (int k = 0; k < n_art; ++k) t.blocked[static_cast<std::size_t>(n + r + k)] = true;
  }

  // Phase 2: rebuild reduced costs for the real objective.
  t.cost.setZero();
  t.cost.head(n) = obj;
  t.shift = 0.0;
  for (int i = 0; i < r; ++i) {
    const int bj = t.basis[static_cast<std::size_t>(i)];
    const double cb = t.cost[bj];
    if (cb != 0.0) {
      t.cost -= cb * t.A.row(i).transpose();
      t.cost[bj] = 0.0;  // keep basic columns exactly at zero cost
      t.shift += cb * t.rhs[i];
    }
  }

  out.status = t.iterate();
  out.iterations = t.iterations;
  if (out.status == SimplexResult::Status::Unbounded) return out;

  out.x = Vector::Zero(n);
  for (int i = 0; i < r; ++i) {
    const int bj = t.basis[static_cast<std::size_t>(i)];
    if (bj < n) out.x[bj] = t.rhs[i];
  }
  out.objective = t.shift;
  return out;
}

}  // namespace cplab
