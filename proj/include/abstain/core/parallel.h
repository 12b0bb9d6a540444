#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace abstain {

/// Runs fn(i) for i in [0, n) on at most `max_in_flight` threads. Results
/// must be written by index; completion order is unspecified. The first
/// exception thrown by fn is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_in_flight, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(n, max_in_flight));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace abstain
