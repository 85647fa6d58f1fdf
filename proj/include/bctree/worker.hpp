#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bctree {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must be
// independent; callers write results into per-index slots and reduce after
// the join, so output bytes never depend on scheduling.
inline void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(jobs, n));
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const long i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

inline int default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace bctree
