#include <doctest.h>

#include "cplab/rng.hpp"
#include "cplab/simplex.hpp"

using namespace cplab;

TEST_CASE("textbook maximization") {
  // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18; optimum 36 at (2, 6)
  Matrix G(3, 2);
  G << 1, 0, 0, 2, 3, 2;
  Vector h(3);
  h << 4, 12, 18;
  Vector obj(2);
  obj << 3, 5;
  const auto r = simplex_maximize(G, h, obj);
  REQUIRE(r.status == SimplexResult::Status::Optimal);
  CHECK(r.objective == doctest::Approx(36.0));
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(6.0));
}

TEST_CASE("negative rhs forces phase 1") {
  // max -x st -x <= -2  (x >= 2); optimum -2 at x = 2
  Matrix G(1, 1);
  G << -1;
  Vector h(1);
  h << -2;
  Vector obj(1);
  obj << -1;
  const auto r = simplex_maximize(G, h, obj);
  REQUIRE(r.status == SimplexResult::Status::Optimal);
  CHECK(r.objective == doctest::Approx(-2.0));
  CHECK(r.x[0] == doctest::Approx(2.0));
}

TEST_CASE("infeasible system detected") {
  // x <= 1 and -x <= -3 (x >= 3)
  Matrix G(2, 1);
  G << 1, -1;
  Vector h(2);
  h << 1, -3;
  Vector obj(1);
  obj << 1;
  const auto r = simplex_maximize(G, h, obj);
  CHECK(r.status == SimplexResult::Status::Infeasible);
}

TEST_CASE("unbounded direction detected") {
  Matrix G(1, 2);
  G << 1, -1;
  Vector h(1);
  h << 1;
  Vector obj(2);
  obj << 0, 1;
  const auto r = simplex_maximize(G, h, obj);
  CHECK(r.status == SimplexResult::Status::Unbounded);
}

TEST_CASE("degenerate vertices do not cycle") {
  // classic degenerate cube-corner: many ties at the origin vertex
  Matrix G(4, 3);
  G << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
  Vector h(4);
  h << 1, 1, 1, 1;  // last row redundant and degenerate at optimum
  Vector obj(3);
  obj << 1, 1, 1;
  const auto r = simplex_maximize(G, h, obj);
  REQUIRE(r.status == SimplexResult::Status::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("random LPs: dual witness bounds the optimum") {
  Xoshiro256pp rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 6, n = 3;
    Matrix G(r, n);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = rng.gaussian();
    Vector h(r), obj(n);
    for (int i = 0; i < r; ++i) h[i] = std::abs(rng.gaussian()) + 0.1;  // origin feasible
    for (int j = 0; j < n; ++j) obj[j] = rng.gaussian();
    // box to keep it bounded
    Matrix Gb(r + n, n);
    Gb.topRows(r) = G;
    Gb.bottomRows(n) = Matrix::Identity(n, n);
    Vector hb(r + n);
    hb.head(r) = h;
    hb.tail(n).setConstant(10.0);
    const auto res = simplex_maximize(Gb, hb, obj);
    REQUIRE(res.status == SimplexResult::Status::Optimal);
    // feasibility of the reported point
    CHECK(((Gb * res.x - hb).array() <= 1e-8).all());
    CHECK((res.x.array() >= -1e-12).all());
    CHECK(res.objective == doctest::Approx(obj.dot(res.x)).epsilon(1e-9));
  }
}

TEST_CASE("determinism: identical pivot sequences") {
  Matrix G(3, 2);
  G << 2, 1, 1, 3, -1, 1;
  Vector h(3);
  h << 8, 9, 2;
  Vector obj(2);
  obj << 1, 2;
  const auto a = simplex_maximize(G, h, obj);
  const auto b = simplex_maximize(G, h, obj);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}
