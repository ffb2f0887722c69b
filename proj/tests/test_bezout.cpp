#include <doctest.h>

#include <algorithm>
#include <random>

#include "cplab/bezout.hpp"

using namespace cplab;

TEST_CASE("binomials") {
  CHECK(binomial(4, 2) == 6);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(1, 1) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(12, 6) == 924);
}

TEST_CASE("single group reduces to classical product of degrees") {
  MultiHomStructure s;
  s.group_sizes = {3};
  s.degree_rows = {{2}, {3}, {4}};
  CHECK(bezout_number(s).bezout_number == 24);
}

TEST_CASE("bi-homogeneous extraction at (4,2)") {
  // groups (4, 2); rows 2x(1,0), 3x(1,1), 1x(1,5):
  // coefficient of z1^4 z2^2 in z1^2 (z1+z2)^3 (z1+5 z2) = 18
  const auto s = crossing_system_structure(4, 2, Flavor::PD);
  REQUIRE(s.group_sizes == std::vector<int>{4, 2});
  const auto r = bezout_number(s);
  CHECK(r.bezout_number == 18);
  CHECK(r.bezout_number == 2 * 2 * binomial(3, 2) + binomial(4, 2));
}

TEST_CASE("row permutation invariance") {
  auto s = crossing_system_structure(5, 2, Flavor::D);
  const auto base = bezout_number(s).bezout_number;
  std::mt19937 gen(123);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(s.degree_rows.begin(), s.degree_rows.end(), gen);
    CHECK(bezout_number(s).bezout_number == base);
  }
}

TEST_CASE("group permutation invariance") {
  MultiHomStructure s;
  s.group_sizes = {2, 3};
  s.degree_rows = {{1, 0}, {1, 1}, {2, 1}, {0, 1}, {1, 2}};
  MultiHomStructure t;
  t.group_sizes = {3, 2};
  for (const auto& row : s.degree_rows) t.degree_rows.push_back({row[1], row[0]});
  CHECK(bezout_number(s).bezout_number == bezout_number(t).bezout_number);
}

TEST_CASE("non-square structures are rejected") {
  MultiHomStructure s;
  s.group_sizes = {2, 2};
  s.degree_rows = {{1, 0}, {1, 1}, {1, 1}};
  CHECK_THROWS_AS((void)bezout_number(s), Error);
}

TEST_CASE("flavor tables match the closed forms for all 1 <= n < m <= 12") {
  for (int m = 2; m <= 12; ++m) {
    for (int n = 1; n < m; ++n) {
      const long long buck = binomial(m - 1, n);
      const auto pd = bezout_number(crossing_system_structure(m, n, Flavor::PD)).bezout_number;
      const auto p = bezout_number(crossing_system_structure(m, n, Flavor::P)).bezout_number;
      const auto d = bezout_number(crossing_system_structure(m, n, Flavor::D)).bezout_number;
      CHECK(pd == 2 * n * buck + binomial(m, n));
      CHECK(p == (2 * n - 2) * buck);
      CHECK(d == (2 * n + 1) * buck);
    }
  }
}

TEST_CASE("closed-form bounds and spurious counts") {
  const auto b42 = crossing_bounds(4, 2);
  CHECK(b42.B_pd == 12);
  CHECK(b42.spurious == 6);
  const auto raw = bezout_number(crossing_system_structure(4, 2, Flavor::PD)).bezout_number;
  CHECK(raw - b42.spurious == b42.B_pd);  // 18 - 6 = 12

  const auto b52 = crossing_bounds(5, 2);
  CHECK(b52.B_d == 2 * 2 * binomial(4, 2));
  CHECK(bezout_number(crossing_system_structure(5, 2, Flavor::D)).bezout_number ==
        (2 * 2 + 1) * binomial(4, 2));  // 30

  for (int m = 2; m <= 12; ++m) CHECK(crossing_bounds(m, 1).B_p == 0);
}

TEST_CASE("degree-zero last row kills the primal count at n = 1") {
  for (int m = 2; m <= 8; ++m) {
    const auto s = crossing_system_structure(m, 1, Flavor::P);
    CHECK(s.degree_rows.back() == std::vector<long long>{0, 0});
    CHECK(bezout_number(s).bezout_number == 0);
  }
}
