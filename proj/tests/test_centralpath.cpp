#include <doctest.h>

#include <cmath>

#include "cplab/arrangement.hpp"
#include "cplab/centralpath.hpp"
#include "cplab/sample.hpp"
#include "cplab/simplex.hpp"

using namespace cplab;

namespace {

const Tolerances kTol;

/// s1 = x, s2 = 1 - x, c = 1. On the (+,+) cell the path solves
/// x^2 - (1 + 2 mu) x + mu = 0, so x(mu) has a closed form.
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

double hand_x(double mu) {
  return 0.5 * ((1.0 + 2.0 * mu) - std::sqrt(1.0 + 4.0 * mu * mu));
}

LpInstance square_instance(double cx, double cy) {
  LpInstance inst;
  inst.m = 4;
  inst.n = 2;
  inst.A = Matrix(4, 2);
  inst.A << 1, 0, 0, 1, -1, 0, 0, -1;
  inst.b = Vector(4);
  inst.b << 0, 0, -1, -1;
  inst.c = Vector(2);
  inst.c << cx, cy;
  return inst;
}

PathPoint hand_point(double mu) {
  PathPoint p;
  const double x = hand_x(mu);
  p.mu = mu;
  p.x = Vector::Constant(1, x);
  p.s = Vector(2);
  p.s << x, 1.0 - x;
  p.y = Vector(2);
  p.y << mu / x, mu / (1.0 - x);
  return p;
}

}  // namespace

TEST_CASE("analytic center of the hand segment is 1/2") {
  PathSolver solver(hand_instance(), SignVector::all_plus(2), kTol);
  const auto center = solver.analytic_center(Vector::Constant(1, 0.37));
  CHECK(center.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  // gradient oracle
  const Vector g = solver.cell().A.transpose() * center.s.cwiseInverse();
  CHECK(g.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("analytic center of the square is its middle") {
  PathSolver solver(square_instance(1.0, 0.5), SignVector::all_plus(4), kTol);
  Vector x0(2);
  x0 << 0.21, 0.83;
  const auto center = solver.analytic_center(x0);
  CHECK(center.x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(center.x[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("newton_correct accepts an exact path point unchanged") {
  PathSolver solver(hand_instance(), SignVector::all_plus(2), kTol);
  const PathPoint exact = hand_point(1.0);
  const PathPoint out = solver.newton_correct(1.0, exact);
  CHECK((out.x - exact.x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(out.residual <= kTol.newton_tol);
}

TEST_CASE("newton_correct recovers the closed-form path from a rough start") {
  PathSolver solver(hand_instance(), SignVector::all_plus(2), kTol);
  for (double mu : {0.01, 0.3, 1.0, 7.5, 300.0}) {
    PathPoint start;
    start.x = Vector::Constant(1, 0.5);
    start.s = Vector(2);
    start.s << 0.5, 0.5;
    start.y = Vector(2);
    start.y << 2.0 * mu, mu;
    const PathPoint p = solver.newton_correct(mu, start);
    CHECK(p.x[0] == doctest::Approx(hand_x(mu)).epsilon(1e-9));
    CHECK(p.residual <= kTol.newton_tol);
    CHECK(solver.e1_residual(p) <= kTol.newton_tol);
  }
}

TEST_CASE("derivatives satisfy the differentiated systems and FD oracle") {
  const LpInstance inst = sample_instance(5, 2, 31, kTol);
  const ArrangementSummary s = enumerate_cells(inst, kTol);
  int tested = 0;
  for (const auto& cell : s.per_cell) {
    if (cell.primal_status != PrimalStatus::BoundedStrict || tested >= 2) continue;
    ++tested;
    PathSolver solver(inst, cell.eps, kTol);
    const auto center = solver.analytic_center(*cell.witness_x);
    PathPoint p;
    p.x = center.x;
    p.s = center.s;
    p.y = center.s.cwiseInverse();
    p = solver.newton_correct(1.0, p);
    solver.fill_derivatives(p);

    CHECK(solver.e2_residual(p) < 1e-10);
    CHECK(solver.accel_residual(p) < 1e-10);
    CHECK(p.sdot.norm() + p.ydot.norm() > 0.0);

    // finite differences at h = 1e-4 mu
    const double h = 1e-4 * p.mu;
    const PathPoint plus = solver.point_at(p.mu + h, p);
    const PathPoint minus = solver.point_at(p.mu - h, p);
    const Vector fd_x = (plus.x - minus.x) / (2 * h);
    const Vector fd_s = (plus.s - minus.s) / (2 * h);
    const Vector fd_y = (plus.y - minus.y) / (2 * h);
    Vector v(inst.n + 2 * inst.m), fd(inst.n + 2 * inst.m);
    v << p.xdot, p.sdot, p.ydot;
    fd << fd_x, fd_s, fd_y;
    CHECK((fd - v).norm() / v.norm() < 1e-5);
  }
  CHECK(tested == 2);
}

TEST_CASE("1-d cells have a fixed primal direction") {
  PathSolver solver(hand_instance(), SignVector::all_plus(2), kTol);
  PathPoint p = hand_point(0.05);
  p = solver.newton_correct(0.05, p);
  solver.fill_derivatives(p);
  Vector dir0(3);
  dir0 << p.xdot, p.sdot;
  dir0.normalize();
  for (double mu : {0.4, 2.0, 60.0}) {
    PathPoint q = hand_point(mu);
    q = solver.newton_correct(mu, q);
    solver.fill_derivatives(q);
    Vector dir(3);
    dir << q.xdot, q.sdot;
    dir.normalize();
    CHECK((dir - dir0).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("trace spans both tails and matches the closed form") {
  const LpInstance inst = hand_instance();
  const PathTrace tr = trace_path(inst, SignVector::all_plus(2), kTol);
  CHECK((tr.truncation_flags & kLoTailConverged) != 0);
  CHECK((tr.truncation_flags & kHiTailConverged) != 0);
  CHECK(!tr.capped());
  REQUIRE(tr.points.size() > 10);
  for (std::size_t k = 1; k < tr.points.size(); ++k)
    CHECK(tr.points[k].mu > tr.points[k - 1].mu);
  for (std::size_t k = 0; k < tr.points.size(); k += 7) {
    const auto& p = tr.points[k];
    CHECK(p.x[0] == doctest::Approx(hand_x(p.mu)).epsilon(1e-8));
  }
  // duality gap s.y = m mu along the trace
  for (const auto& p : tr.points)
    CHECK(std::abs(p.s.dot(p.y) - 2.0 * p.mu) / (2.0 * (1.0 + p.mu)) < 1e-8);
}

TEST_CASE("trace endpoints approach the center and the simplex optimum") {
  const LpInstance inst = sample_instance(5, 2, 31, kTol);
  const ArrangementSummary s = enumerate_cells(inst, kTol);
  for (const auto& cell : s.per_cell) {
    if (cell.primal_status != PrimalStatus::BoundedStrict) continue;
    PathSolver solver(inst, cell.eps, kTol);
    const PathTrace tr = solver.trace(*cell.witness_x);
    CHECK(!tr.capped());

    // mu -> infinity end: the analytic center
    const auto center = solver.analytic_center(*cell.witness_x);
    CHECK((tr.points.back().x - center.x).cwiseAbs().maxCoeff() < 1e-6);

    // mu -> 0 end: the LP optimum of min c.x over the cell, via the simplex
    // oracle on the sign-normalized instance with a shifted box
    const auto& cellp = solver.cell();
    const double box = 1e3;
    Matrix G(cellp.m + cellp.n, cellp.n);
    Vector h(cellp.m + cellp.n);
    G.topRows(cellp.m) = -cellp.A;
    h.head(cellp.m) = -cellp.A * Vector::Constant(cellp.n, box) - cellp.b;
    G.bottomRows(cellp.n) = Matrix::Identity(cellp.n, cellp.n);
    h.tail(cellp.n).setConstant(2.0 * box);
    const auto lp = simplex_maximize(G, h, -cellp.c);
    REQUIRE(lp.status == SimplexResult::Status::Optimal);
    const Vector x_opt = lp.x - Vector::Constant(cellp.n, box);
    CHECK((tr.points.front().x - x_opt).cwiseAbs().maxCoeff() < 1e-4);
    break;  // one cell is enough here
  }
}

TEST_CASE("rescaling c rescales the parametrization but not the path") {
  const LpInstance inst = sample_instance(4, 2, 9, kTol);
  const ArrangementSummary s = enumerate_cells(inst, kTol);
  const double lambda = 4.2;
  for (const auto& cell : s.per_cell) {
    if (cell.primal_status != PrimalStatus::BoundedStrict) continue;
    PathSolver solver(inst, cell.eps, kTol);
    LpInstance scaled = inst;
    scaled.c *= lambda;
    PathSolver solver2(scaled, cell.eps, kTol);
    const PathTrace tr = solver.trace(*cell.witness_x);
    for (std::size_t k = 0; k < tr.points.size(); k += std::max<std::size_t>(1, tr.points.size() / 6)) {
      const auto& p = tr.points[k];
      PathPoint warm;
      warm.x = p.x;
      warm.s = p.s;
      warm.y = lambda * p.y;
      const PathPoint q = solver2.newton_correct(lambda * p.mu, warm);
      CHECK((q.x - p.x).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((q.s - p.s).cwiseAbs().maxCoeff() < 1e-6);
    }
    break;
  }
}

TEST_CASE("two seed points trace the same curve") {
  // fine steps so the mu-interpolant is well below the comparison tolerance
  const LpInstance inst = hand_instance();
  TraceOptions fine;
  fine.dt_max = 1e-3;
  fine.dt_init = 1e-3;
  PathSolver solver(inst, SignVector::all_plus(2), kTol);

  const PathTrace a = solver.trace(Vector::Constant(1, 0.5), fine);

  // second trace: seed the march from a different interior point
  const PathTrace b = solver.trace(Vector::Constant(1, 0.12), fine);

  auto interp = [&](const PathTrace& tr, double mu) -> Vector {
    std::size_t lo = 0, hi = tr.points.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (tr.points[mid].mu <= mu ? lo : hi) = mid;
    }
    const auto& p = tr.points[lo];
    const auto& q = tr.points[hi];
    const double t = (mu - p.mu) / (q.mu - p.mu);
    Vector zp(p.x.size() + p.s.size()), zq(zp.size());
    zp << p.x, p.s;
    zq << q.x, q.s;
    return zp + t * (zq - zp);
  };

  int compared = 0;
  for (std::size_t k = 0; k < a.points.size(); k += 200) {
    const auto& p = a.points[k];
    if (p.mu <= b.points.front().mu || p.mu >= b.points.back().mu) continue;
    Vector z(p.x.size() + p.s.size());
    z << p.x, p.s;
    CHECK((z - interp(b, p.mu)).cwiseAbs().maxCoeff() < 1e-6);
    ++compared;
  }
  CHECK(compared > 5);
}
