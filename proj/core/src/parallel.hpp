#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "kdeforge/threads.hpp"

namespace kdeforge::detail {

/// Runs body(i) for i in [0, count) over contiguous chunks on a transient
/// thread pool. Callers write only to slot i, so results do not depend on the
/// schedule. The first exception thrown by any chunk is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body, std::size_t min_chunk = 1) {
  const std::size_t hw = max_threads();
  const std::size_t workers = std::min(hw, (count + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kdeforge::detail
