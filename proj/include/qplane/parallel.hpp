#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qp {

// Worker count: QW_THREADS if set to a positive integer, else the hardware
// concurrency (at least 1).
inline unsigned worker_count() {
  if (const char* env = std::getenv("QW_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n > 0)
      return unsigned(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Calls body(i) for i in [0, n) across worker threads. Each index is handled
// exactly once; results must be written to per-index slots so the outcome is
// independent of scheduling. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first)
            first = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool)
    t.join();
  if (first)
    std::rethrow_exception(first);
}

} // namespace qp
