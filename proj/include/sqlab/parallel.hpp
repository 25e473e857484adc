#pragma once

#include <cstddef>
#include <functional>

namespace sqlab {

// Worker count used when a caller passes threads <= 0: the value set by
// set_default_threads(), else SQLAB_THREADS, else the hardware concurrency.
int default_threads();
void set_default_threads(int threads);
int resolve_threads(int requested);

/**
 * Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
 * handed out dynamically, so each body must write only its own outputs. After
 * a failure no new items start, and the failure with the lowest index among
 * the items that ran is rethrown.
 */
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace sqlab
