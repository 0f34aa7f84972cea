#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace she {

/// Environment variable holding the default worker count.
inline constexpr const char* kThreadsEnv = "SHE_THREADS";

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnv)) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Calls f(i) for i in [0, count) on up to `threads` workers. Work items are
/// claimed dynamically, so f must write only to slot i of its output. The
/// first exception thrown by any item is rethrown after all workers join.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  const std::size_t nworkers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise reduction of items [lo, hi) with a fixed tree shape.
template <class T, class Merge>
T pairwise_reduce(const std::vector<T>& items, std::size_t lo, std::size_t hi, Merge merge) {
  if (hi - lo == 1) return items[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return merge(pairwise_reduce(items, lo, mid, merge), pairwise_reduce(items, mid, hi, merge));
}

}  // namespace she
