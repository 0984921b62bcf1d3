#include "mixfx/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace mixfx {

namespace {

int initial_budget() {
  if (const char* env = std::getenv("MIXFX_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& budget() {
  static std::atomic<int> value{initial_budget()};
  return value;
}

// True on worker threads and inside SerialSection scopes: nested parallel_for
// calls run inline rather than oversubscribing.
thread_local bool tl_serial = false;

} // namespace

int thread_budget() { return budget().load(std::memory_order_relaxed); }

void set_thread_budget(int n) {
  budget().store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

SerialSection::SerialSection() : prev_(tl_serial) { tl_serial = true; }
SerialSection::~SerialSection() { tl_serial = prev_; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers =
      tl_serial ? 1
                : std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);

  // Small contiguous chunks: deterministic outputs (per-index slots) with
  // decent load balance when per-item cost varies.
  const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));

  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      tl_serial = true;
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= n || failed.load(std::memory_order_relaxed)) return;
        const std::size_t end = std::min(n, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true))
              first_error = std::current_exception();
            return;
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load() && first_error) std::rethrow_exception(first_error);
}

} // namespace mixfx
