#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace opderiv {

/// Worker cap: min(hardware, OPDERIV_THREADS) with requested override.
inline unsigned worker_count(unsigned requested = 0, std::size_t jobs = ~std::size_t{0}) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("OPDERIV_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

/// Runs fn(i) for i in [0, count). Results must be written to per-index slots;
/// the fan-out order is unspecified but the output is deterministic.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned requested_threads = 0) {
  const unsigned workers = worker_count(requested_threads, count);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace opderiv
