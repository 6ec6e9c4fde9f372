#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace manhattan::detail {

// Runs body(begin, end) over contiguous chunks of [0, n). Results must be
// written to disjoint, preallocated slots so the outcome is independent of
// the thread count. The first exception thrown by any chunk is rethrown.
// grain is the smallest n worth spawning threads for.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body&& body, std::int64_t grain = 1024) {
  if (threads < 1) threads = 1;
  if (threads == 1 || n < grain) {
    body(std::int64_t(0), n);
    return;
  }
  const int nchunk = threads;
  std::vector<std::thread> pool;
  pool.reserve(nchunk);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int i = 0; i < nchunk; ++i) {
    const std::int64_t begin = n * i / nchunk;
    const std::int64_t end = n * (i + 1) / nchunk;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace manhattan::detail
