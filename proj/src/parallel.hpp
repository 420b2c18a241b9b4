#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace randlod::detail {

inline int worker_count(int threads, int n) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min(threads, n));
}

// body(index, worker). Indices are handed out dynamically; callers write
// results to per-index slots so the outcome does not depend on scheduling.
// If several indices throw, the exception of the smallest index wins.
template <class F>
void parallel_for(int n, int workers, F&& body) {
  if (n <= 0) return;
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  int failedIndex = std::numeric_limits<int>::max();
  std::exception_ptr failure;
  auto run = [&](int w) {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failedIndex) {
          failedIndex = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace randlod::detail
