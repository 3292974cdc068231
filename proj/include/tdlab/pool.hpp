#pragma once

#include <atomic>
#include <cstddef>
#include <functional>

namespace tdlab {

// --threads, else TD_LAB_THREADS, else 1.
int resolve_threads(int requested);

// Runs task(i) for i in [0, n) on `threads` workers. Tasks own their outputs
// (write into slot i), so results do not depend on scheduling. When `stop` is
// set, no new index is started. Returns the number of tasks started.
std::size_t parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task,
                         const std::atomic<bool>* stop = nullptr);

}  // namespace tdlab
