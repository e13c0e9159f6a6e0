#pragma once

// Index-parallel sweeps. Work items write into preassigned slots and every
// item derives its randomness from its own index, so results are identical
// for any thread count. TETRAKIN_THREADS picks the worker count (default 1).

#include <cstdlib>
#include <thread>
#include <vector>

namespace tetrakin {

inline int thread_count() {
  if (const char* env = std::getenv("TETRAKIN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

template <typename F>
void parallel_for(int n, F body) {
  const int workers = std::min(thread_count(), n > 0 ? n : 1);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([=]() {
      for (int i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace tetrakin
