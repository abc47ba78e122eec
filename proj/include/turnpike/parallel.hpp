#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace turnpike::par {

/// Thread cap: TURNPIKE_THREADS if set (clamped to >= 1), else the OpenMP
/// default; 1 when built without OpenMP.
int max_threads();

/// True when a loop of `n` iterations is worth spawning a parallel region.
bool should_parallelize(std::int64_t n, std::int64_t grain);

/// Data-parallel map over [0, n). Iterations must write disjoint outputs;
/// scheduling is static so the result is identical for any thread count.
template <typename F>
void parallel_for(std::int64_t n, F&& body, std::int64_t grain = 2048) {
#ifdef _OPENMP
  if (should_parallelize(n, grain)) {
    const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
#endif
  (void)grain;
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

inline constexpr std::int64_t kSumBlock = 4096;

/// Sum of term(i) over [0, n) accumulated in fixed blocks of kSumBlock,
/// block partials added in index order. The rounding pattern is a function
/// of n only, so serial and parallel execution give bit-identical sums.
template <typename F>
double blocked_sum(std::int64_t n, F&& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + kSumBlock - 1) / kSumBlock;
  if (nblocks == 1) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
  parallel_for(
      nblocks,
      [&](std::int64_t b) {
        const std::int64_t lo = b * kSumBlock;
        const std::int64_t hi = std::min(n, lo + kSumBlock);
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
      },
      1);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace turnpike::par
