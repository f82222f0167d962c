#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nhqmc {

/// Runs body(block) for every block in [0, n_blocks) on up to `workers`
/// threads. Each block is processed by exactly one thread, so callers that
/// write per-block results and reduce them in block order get output that
/// does not depend on the worker count.
template <class Body>
void parallel_blocks(std::size_t n_blocks, unsigned workers, Body&& body) {
  const unsigned threads = static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(workers, n_blocks)));
  if (threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        try {
          body(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n_blocks;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (cascade) sum of values[first, last) under `add`.
template <class T, class Add>
T pairwise_sum(const std::vector<T>& values, std::size_t first,
               std::size_t last, const T& zero, Add add) {
  if (last <= first) return zero;
  if (last - first == 1) return values[first];
  const std::size_t mid = first + (last - first) / 2;
  return add(pairwise_sum(values, first, mid, zero, add),
             pairwise_sum(values, mid, last, zero, add));
}

}  // namespace nhqmc
