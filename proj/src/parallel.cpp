#include "growup/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace growup {

namespace {
std::atomic<int> g_workers{0};
}

void set_default_workers(int workers) { g_workers = std::max(0, workers); }

int default_workers() {
  int w = g_workers.load();
  if (w > 0) return w;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  int w = workers > 0 ? workers : default_workers();
  w = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), n));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int k = 0; k < w; ++k) {
    std::size_t lo = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(w);
    std::size_t hi = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(w);
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < failed_index) {
            failed_index = i;
            failure = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace growup
