#include "cplab/bezout.hpp"

#include <numeric>

namespace cplab {

namespace {

long long checked_add(long long a, long long b) {
  long long r = 0;
  require(!__builtin_add_overflow(a, b, &r), Errc::Overflow, "coefficient overflow");
  return r;
}

long long checked_mul(long long a, long long b) {
  long long r = 0;
  require(!__builtin_mul_overflow(a, b, &r), Errc::Overflow, "coefficient overflow");
  return r;
}

}  // namespace

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long r = 1;
  for (int i = 1; i <= k; ++i) {
    r = checked_mul(r, n - k + i);
    r /= i;  // exact: r is C(n-k+i, i) * i! / i! at each step
  }
  return r;
}

BezoutResult bezout_number(const MultiHomStructure& s) {
  const int g = static_cast<int>(s.group_sizes.size());
  require(g >= 1, Errc::BadDims, "need at least one variable group");
  long long target_total = 0;
  for (int kj : s.group_sizes) {
    require(kj >= 0, Errc::BadDims, "negative group size");
    target_total += kj;
  }
  require(static_cast<long long>(s.degree_rows.size()) == target_total, Errc::NonSquare,
          "sum of group sizes must equal the number of equations");
  for (const auto& row : s.degree_rows) {
    require(static_cast<int>(row.size()) == g, Errc::DimensionMismatch,
            "degree row length != number of groups");
    for (long long dij : row)
      require(dij >= 0, Errc::InvalidArgument, "degrees must be nonnegative");
  }

  // dense coefficient array over multidegrees <= (k_1, ..., k_g)
  std::vector<int> extent(s.group_sizes.begin(), s.group_sizes.end());
  for (auto& e : extent) ++e;
  std::size_t total = 1;
  for (int e : extent) total *= static_cast<std::size_t>(e);

  std::vector<int> stride(static_cast<std::size_t>(g), 1);
  for (int j = g - 2; j >= 0; --j)
    stride[static_cast<std::size_t>(j)] =
        stride[static_cast<std::size_t>(j + 1)] * extent[static_cast<std::size_t>(j + 1)];

  std::vector<long long> poly(total, 0), next(total, 0);
  poly[0] = 1;

  std::vector<int> deg(static_cast<std::size_t>(g), 0);  // multidegree of linear index
  for (const auto& row : s.degree_rows) {
    std::fill(next.begin(), next.end(), 0);
    std::fill(deg.begin(), deg.end(), 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
      const long long cv = poly[idx];
      if (cv != 0) {
        for (int j = 0; j < g; ++j) {
          const long long dij = row[static_cast<std::size_t>(j)];
          if (dij == 0) continue;
          if (deg[static_cast<std::size_t>(j)] + 1 >= extent[static_cast<std::size_t>(j)])
            continue;  // truncated away
          const std::size_t nidx = idx + static_cast<std::size_t>(stride[static_cast<std::size_t>(j)]);
          next[nidx] = checked_add(next[nidx], checked_mul(cv, dij));
        }
      }
      // increment mixed-radix counter (last group fastest)
      for (int j = g - 1; j >= 0; --j) {
        if (++deg[static_cast<std::size_t>(j)] < extent[static_cast<std::size_t>(j)]) break;
        deg[static_cast<std::size_t>(j)] = 0;
      }
    }
    poly.swap(next);
  }

  BezoutResult out;
  out.structure = s;
  out.bezout_number = poly[total - 1];  // coefficient of prod zeta_j^{k_j}
  return out;
}

MultiHomStructure crossing_system_structure(int m, int n, Flavor f) {
  require(n >= 1 && m > n, Errc::BadDims, "need m > n >= 1");
  MultiHomStructure s;
  s.group_sizes = {m, m - n};
  s.degree_rows.reserve(static_cast<std::size_t>(2 * m - n));
  for (int i = 0; i < m - n; ++i) s.degree_rows.push_back({1, 0});
  for (int i = 0; i < m - 1; ++i) s.degree_rows.push_back({1, 1});
  switch (f) {
    case Flavor::PD: s.degree_rows.push_back({1, 2LL * n + 1}); break;
    case Flavor::P: s.degree_rows.push_back({0, 2LL * n - 2}); break;
    case Flavor::D: s.degree_rows.push_back({0, 2LL * n + 1}); break;
  }
  return s;
}

CrossingBounds crossing_bounds(int m, int n) {
  require(n >= 1 && m > n, Errc::BadDims, "need m > n >= 1");
  CrossingBounds b;
  const long long buck = binomial(m - 1, n);
  b.B_pd = checked_mul(2LL * n, buck);
  b.B_p = checked_mul(2LL * (n - 1), buck);
  b.B_d = b.B_pd;
  b.spurious = binomial(m, n);
  return b;
}

}  // namespace cplab
