#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace osod {

// Worker count resolution: an explicit request wins, otherwise the hardware
// count; the OSOD_THREADS environment variable caps the result either way.
inline std::size_t resolve_thread_count(std::size_t requested = 0) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  if (const char* env = std::getenv("OSOD_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      n = std::min<std::size_t>(n, cap);
    }
  }
  return std::max<std::size_t>(1, n);
}

// Static block partition over [0, n). Each index is visited exactly once and
// workers must write only to their own slots, which keeps results identical
// for every worker count. The first worker exception is rethrown after join.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  if (n == 0) return;
  const std::size_t workers = std::min(resolve_thread_count(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace osod
