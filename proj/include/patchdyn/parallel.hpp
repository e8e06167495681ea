#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace patchdyn {

// Worker cap: PATCHDYN_THREADS when set, hardware concurrency otherwise.
inline int default_threads() {
  if (const char* env = std::getenv("PATCHDYN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Static block partition over [0, count); work items must be independent.
// Results should be written to preallocated slots so output order never
// depends on scheduling.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& body) {
  if (threads <= 0) threads = default_threads();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < count; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace patchdyn
