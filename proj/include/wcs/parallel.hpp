#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace wcs {

/// Runs fn(i) for i in [0,n) on up to `threads` workers. Work items must not share mutable
/// state; results should be written to per-index slots so aggregation is order independent.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace wcs
