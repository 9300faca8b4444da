#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stochsweep::detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(task) for task in [0, n_tasks). Tasks are claimed dynamically;
/// callers write results into per-task slots so scheduling never changes
/// them. The first exception in task order is rethrown.
template <typename Body>
void parallel_tasks(std::size_t n_tasks, unsigned threads, Body&& body) {
  std::vector<std::exception_ptr> errors(n_tasks);
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n_tasks, 1)));
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) {
      try {
        body(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < n_tasks; t = next++) {
          try {
            body(t);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stochsweep::detail
