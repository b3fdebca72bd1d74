#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace slicefem {

// Static block partition of [0, n) over nthreads workers. Each index is
// processed exactly once by exactly one worker, so writes to per-index slots
// are race free and results do not depend on scheduling.
inline void parallel_for(int n, int nthreads, const std::function<void(int)>& body) {
  if (n <= 0) return;
  nthreads = std::max(1, std::min(nthreads, n));
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  const int chunk = (n + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &body] {
      for (int i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& w : workers) w.join();
}

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

}  // namespace slicefem
