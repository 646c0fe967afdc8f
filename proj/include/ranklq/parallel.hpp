#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ranklq {

/// Worker count actually used for a requested `threads` value (<= 0 means all hardware threads).
inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls body(i) for every i in [0, count). Indices are split into contiguous blocks, one per
/// worker. Results must be written to per-index slots so the output does not depend on the
/// worker count.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, resolve_threads(threads)));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t used = std::min(workers, count);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t begin = count * w / used;
    const std::size_t end = count * (w + 1) / used;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ranklq
