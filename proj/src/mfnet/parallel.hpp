#pragma once

#include <cstddef>
#include <functional>

namespace mfnet {

// Process-wide worker count used by every parallel loop (default 1).
void set_thread_count(unsigned threads);
unsigned thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() threads. Each index
// is executed exactly once; callers write results into slot i so the output
// never depends on the scheduling. The exception of the lowest failing index
// is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mfnet
