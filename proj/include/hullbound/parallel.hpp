#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hullbound {

/// Number of worker threads used by chunked loops. Results never depend on it.
std::size_t worker_count();
void set_worker_count(std::size_t workers);

/// Runs body(chunk, begin, end) for every chunk of [0, total). Chunk boundaries
/// depend only on total and chunk_size, so per-chunk seeding keeps results
/// independent of how chunks are scheduled.
template <typename Body>
void for_each_chunk(std::size_t total, std::size_t chunk_size, Body&& body) {
  if (total == 0) return;
  chunk_size = std::max<std::size_t>(chunk_size, 1);
  const std::size_t chunks = (total + chunk_size - 1) / chunk_size;
  const std::size_t workers = std::min(worker_count(), chunks);
  auto run = [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    body(c, begin, std::min(total, begin + chunk_size));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t c = w; c < chunks; c += workers) run(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hullbound
