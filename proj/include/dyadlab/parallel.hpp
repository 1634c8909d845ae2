#pragma once

#include <cstddef>
#include <functional>

namespace dyadlab {

// Worker count: set_threads() if called, else DYADLAB_THREADS, else 1.
int thread_count();
void set_threads(int n);

// Calls fn(i) for i in [0, n) on up to thread_count() threads. Callers write
// results into slot i, so output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dyadlab
