#include "cplab/sample.hpp"

#include "cplab/rng.hpp"

namespace cplab {

LpInstance sample_instance(int m, int n, std::uint64_t seed, const Tolerances& tol,
                           int retry_cap, int* retries_out) {
  require(n >= 1 && m > n, Errc::BadDims, "need m > n >= 1");
  Xoshiro256pp rng(mix_seed(seed, 0x5a5a5a5a));
  int retries = 0;
  for (int attempt = 0; attempt <= retry_cap; ++attempt) {
    LpInstance inst;
    inst.m = m;
    inst.n = n;
    inst.seed = seed;
    // row-major fill order, fixed so a seed pins the exact instance
    inst.A.resize(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) inst.A(i, j) = rng.gaussian();
    inst.b.resize(m);
    for (int i = 0; i < m; ++i) inst.b[i] = rng.gaussian();
    inst.c.resize(n);
    for (int j = 0; j < n; ++j) inst.c[j] = rng.gaussian();
    try {
      inst.validate(tol);
    } catch (const Error&) {
      ++retries;
      continue;
    }
    if (retries_out) *retries_out = retries;
    return inst;
  }
  fail(Errc::ExhaustedRetries, "could not sample a valid instance");
}

}  // namespace cplab
