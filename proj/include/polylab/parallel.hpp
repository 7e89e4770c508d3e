#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polylab {

/// Resolves a worker-count hint: 0 means hardware concurrency.
inline int resolve_workers(int hint) {
  if (hint > 0) return hint;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Calls body(i) for i in [0, count) on up to `workers` threads. Work is
/// handed out by index, so any per-index result is independent of the
/// worker count; the first exception thrown is rethrown after joining.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  const int w = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(std::max<std::size_t>(count, 1))));
  if (w == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Evaluates f(i) for every index and returns the results in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int workers, F&& f) {
  std::vector<T> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace polylab
