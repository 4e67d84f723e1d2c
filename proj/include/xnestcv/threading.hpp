#ifndef XNESTCV_THREADING_HPP
#define XNESTCV_THREADING_HPP

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "xnestcv/dataset.hpp"

namespace xnestcv {

// Worker count: explicit request > 0 wins, then XNESTCV_THREADS, then the
// hardware count. 0 means auto.
inline unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("XNESTCV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1u;
}

// Runs fn(i) for i in [0, count). Each call must write only to its own output
// slot, so results are identical for any worker count.
template <typename Fn>
inline void parallel_for(Index count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<Index>(count, static_cast<Index>(threads)));
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) return;
        const Index i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace xnestcv

#endif  // XNESTCV_THREADING_HPP
