#pragma once

#include <cstddef>
#include <functional>

namespace mixfx {

// Process-wide worker budget. Resolution order: explicit set_thread_budget()
// (CLI --threads), else MIXFX_THREADS env var, else hardware concurrency.
int thread_budget();
void set_thread_budget(int n);

// Runs body(i) for i in [0, n) across the thread budget. Work is split into
// contiguous blocks; callers write results into per-index slots so the output
// is independent of scheduling. The first exception thrown by any worker is
// rethrown on the calling thread after all workers join. Calls made from
// inside a worker (or a SerialSection) run inline instead of spawning again.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Forces every parallel_for on the current thread to run inline while alive.
// Used by inherently sequential hot loops (e.g. an MCMC chain) whose inner
// calls would otherwise pay a thread-spawn per evaluation.
class SerialSection {
public:
  SerialSection();
  ~SerialSection();
  SerialSection(const SerialSection&) = delete;
  SerialSection& operator=(const SerialSection&) = delete;

private:
  bool prev_;
};

} // namespace mixfx
