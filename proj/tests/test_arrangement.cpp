#include <doctest.h>

#include "cplab/arrangement.hpp"
#include "cplab/bezout.hpp"
#include "cplab/linalg.hpp"
#include "cplab/rng.hpp"
#include "cplab/sample.hpp"
#include "cplab/simplex.hpp"

using namespace cplab;

namespace {

const Tolerances kTol;

/// m=2, n=1 instance whose four cells can be enumerated by hand:
/// s1 = x, s2 = 1 - x; the (+,+) cell is the open segment (0, 1).
LpInstance hand_instance() {
  LpInstance inst;
  inst.m = 2;
  inst.n = 1;
  inst.A = Matrix(2, 1);
  inst.A << 1, -1;
  inst.b = Vector(2);
  inst.b << 0, -1;
  inst.c = Vector(1);
  inst.c << 1;
  return inst;
}

/// Unit square (0,1)^2 as the all-plus cell of a 4x2 stack.
LpInstance square_instance() {
  LpInstance inst;
  inst.m = 4;
  inst.n = 2;
  inst.A = Matrix(4, 2);
  inst.A << 1, 0, 0, 1, -1, 0, 0, -1;
  inst.b = Vector(4);
  inst.b << 0, 0, -1, -1;
  inst.c = Vector(2);
  inst.c << 1, 0.5;
  return inst;
}

/// Nonzero kernel vector with strict cell signs exists iff the cell is bounded
/// (independent boundedness oracle via the dual cone).
bool kernel_sign_vector_exists(const LpInstance& inst, const SignVector& eps) {
  const Matrix G = null_space_basis(inst.A, kTol);
  const int d = static_cast<int>(G.cols());
  // maximize t st eps_i (G gamma)_i >= t, |gamma| <= 1
  Matrix S(inst.m, d);
  for (int i = 0; i < inst.m; ++i) S.row(i) = eps.sign(i) * G.row(i);
  Matrix Gc(inst.m + 2 * d, d + 1);
  Vector h(inst.m + 2 * d);
  Gc.setZero();
  // shift gamma = u - 1, t = tau + t_lo with t_lo making every rhs positive
  const Vector srow = S * Vector::Constant(d, 1.0);
  double t_lo = 1e300;
  for (int i = 0; i < inst.m; ++i) t_lo = std::min(t_lo, -srow[i]);
  t_lo -= 1.0;
  Gc.block(0, 0, inst.m, d) = -S;
  Gc.block(0, d, inst.m, 1).setOnes();
  for (int i = 0; i < inst.m; ++i) h[i] = -t_lo - srow[i];
  for (int j = 0; j < d; ++j) {
    Gc(inst.m + j, j) = 1.0;
    h[inst.m + j] = 2.0;
  }
  for (int j = 0; j < d; ++j) {
    Gc(inst.m + d + j, j) = -1.0;  // redundant with u >= 0, harmless
    h[inst.m + d + j] = 0.0;
  }
  Vector obj = Vector::Zero(d + 1);
  obj[d] = 1.0;
  const auto r = simplex_maximize(Gc.topRows(inst.m + d), h.head(inst.m + d), obj);
  return r.objective + t_lo > 1e-9;
}

}  // namespace

TEST_CASE("apply_sign is an involution and identity on all-plus") {
  const LpInstance inst = hand_instance();
  const SignVector plus = SignVector::all_plus(2);
  const LpInstance same = apply_sign(inst, plus);
  CHECK((same.A - inst.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((same.b - inst.b).cwiseAbs().maxCoeff() == 0.0);

  const SignVector eps = SignVector::parse("+-");
  const LpInstance once = apply_sign(inst, eps);
  const LpInstance twice = apply_sign(once, eps);
  CHECK((twice.A - inst.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((twice.b - inst.b).cwiseAbs().maxCoeff() == 0.0);

  const SignVector minus = SignVector::parse("--");
  const LpInstance neg = apply_sign(inst, minus);
  CHECK((neg.A + inst.A).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hand cells classify as expected") {
  const LpInstance inst = hand_instance();

  auto [k_pp, w_pp] = primal_feasibility(inst, SignVector::parse("++"), kTol);
  CHECK(k_pp == FeasibilityKind::StrictlyFeasible);
  REQUIRE(w_pp.has_value());
  CHECK((*w_pp)[0] == doctest::Approx(0.5).epsilon(1e-6));

  auto [k_mm, w_mm] = primal_feasibility(inst, SignVector::parse("--"), kTol);
  CHECK(k_mm == FeasibilityKind::Empty);

  CHECK(is_bounded(inst, SignVector::parse("++"), kTol));
  CHECK(!is_bounded(inst, SignVector::parse("+-"), kTol));
  CHECK(!is_bounded(inst, SignVector::parse("-+"), kTol));
}

TEST_CASE("constructed outward cell is strictly feasible") {
  Xoshiro256pp rng(21);
  const LpInstance inst = sample_instance(6, 3, 99, kTol);
  Vector x0(3);
  for (int j = 0; j < 3; ++j) x0[j] = rng.gaussian();
  const Vector margins = inst.A * x0 - inst.b;
  IntVector e(6);
  for (int i = 0; i < 6; ++i) e[i] = margins[i] >= 0 ? 1 : -1;
  auto [kind, w] = primal_feasibility(inst, SignVector(e), kTol);
  CHECK(kind == FeasibilityKind::StrictlyFeasible);
}

TEST_CASE("unit square cell is bounded with center witness reachable") {
  const LpInstance inst = square_instance();
  const SignVector eps = SignVector::all_plus(4);
  auto [kind, w] = primal_feasibility(inst, eps, kTol);
  CHECK(kind == FeasibilityKind::StrictlyFeasible);
  CHECK(is_bounded(inst, eps, kTol));
  REQUIRE(w.has_value());
  CHECK((*w)[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK((*w)[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("dual strict feasibility on the hand instance") {
  const LpInstance inst = hand_instance();
  // y1 - y2 = 1; strict sign patterns: (+,+), (+,-), (-,-)
  CHECK(dual_strict_feasibility(inst, SignVector::parse("++"), kTol).first);
  CHECK(dual_strict_feasibility(inst, SignVector::parse("+-"), kTol).first);
  CHECK(!dual_strict_feasibility(inst, SignVector::parse("-+"), kTol).first);
  CHECK(dual_strict_feasibility(inst, SignVector::parse("--"), kTol).first);
}

TEST_CASE("hand instance enumeration") {
  const ArrangementSummary s = enumerate_cells(hand_instance(), kTol);
  CHECK(s.bounded_strict_count == 1);
  CHECK(s.buck_expected == 1);
  CHECK(s.joint_count == 2);
  CHECK(s.joint_expected == 2);
  CHECK(s.unbounded_count == 2);
  CHECK(s.empty_count == 1);
  CHECK(s.degenerate_count == 0);
}

TEST_CASE("generic Gaussian counts match Buck and the joint formula") {
  for (auto [m, n, seed] : {std::tuple{5, 2, 42ull}, std::tuple{4, 2, 7ull}, std::tuple{5, 3, 11ull}}) {
    const LpInstance inst = sample_instance(m, n, seed, kTol);
    const ArrangementSummary s = enumerate_cells(inst, kTol);
    CHECK(s.bounded_strict_count == binomial(m - 1, n));
    CHECK(s.joint_count == binomial(m, n));
    // witnesses satisfy their strict inequalities when rechecked
    for (const auto& cell : s.per_cell) {
      if (cell.primal_status != PrimalStatus::BoundedStrict) continue;
      REQUIRE(cell.witness_x.has_value());
      for (int i = 0; i < m; ++i) {
        const double margin = cell.eps.sign(i) * (inst.A.row(i).dot(*cell.witness_x) - inst.b[i]);
        CHECK(margin >= kTol.feas_margin);
      }
      CHECK(!cell.condition_flag);
    }
  }
}

TEST_CASE("boundedness agrees with the kernel sign-vector oracle") {
  const LpInstance inst = sample_instance(5, 2, 1234, kTol);
  for (std::uint64_t k = 0; k < 32; ++k) {
    const SignVector eps = SignVector::from_index(5, k);
    auto [kind, w] = primal_feasibility(inst, eps, kTol);
    if (kind != FeasibilityKind::StrictlyFeasible) continue;
    CHECK(is_bounded(inst, eps, kTol) == kernel_sign_vector_exists(inst, eps));
  }
}

TEST_CASE("sign-action equivariance of the enumeration") {
  const LpInstance inst = sample_instance(4, 2, 5, kTol);
  const SignVector delta = SignVector::parse("+-+-");
  const LpInstance flipped = apply_sign(inst, delta);
  const ArrangementSummary a = enumerate_cells(inst, kTol);
  const ArrangementSummary b = enumerate_cells(flipped, kTol);
  for (std::uint64_t k = 0; k < 16; ++k) {
    const SignVector eps = SignVector::from_index(4, k);
    const SignVector relabeled = eps.compose(delta);
    const auto& cell_b = b.per_cell[k];
    const auto& cell_a = a.per_cell[relabeled.index()];
    CHECK(cell_a.primal_status == cell_b.primal_status);
    CHECK(cell_a.dual_strict == cell_b.dual_strict);
  }
}

TEST_CASE("classification is stable under small perturbations of b") {
  const LpInstance inst = sample_instance(5, 2, 77, kTol);
  const ArrangementSummary s = enumerate_cells(inst, kTol);
  Xoshiro256pp rng(555);
  LpInstance pert = inst;
  for (int trial = 0; trial < 3; ++trial) {
    for (int i = 0; i < pert.m; ++i)
      pert.b[i] = inst.b[i] + (kTol.feas_margin / 10.0) * (2.0 * rng.uniform01() - 1.0);
    const ArrangementSummary s2 = enumerate_cells(pert, kTol);
    for (std::uint64_t k = 0; k < 32; ++k) {
      const bool strict1 = s.per_cell[k].primal_status == PrimalStatus::BoundedStrict ||
                           s.per_cell[k].primal_status == PrimalStatus::UnboundedFeasible;
      const bool empty2 = s2.per_cell[k].primal_status == PrimalStatus::Empty;
      const bool strict2 = s2.per_cell[k].primal_status == PrimalStatus::BoundedStrict ||
                           s2.per_cell[k].primal_status == PrimalStatus::UnboundedFeasible;
      const bool empty1 = s.per_cell[k].primal_status == PrimalStatus::Empty;
      CHECK(!(strict1 && empty2));
      CHECK(!(empty1 && strict2));
    }
  }
}

TEST_CASE("enumeration cap") {
  const LpInstance inst = sample_instance(6, 2, 3, kTol);
  CHECK_THROWS_AS((void)enumerate_cells(inst, kTol, 5), Error);
}
