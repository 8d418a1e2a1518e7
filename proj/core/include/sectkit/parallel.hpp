#pragma once

#include <cstddef>
#include <functional>

namespace sectkit {

/// Worker count resolution: explicit request > SECTKIT_THREADS environment
/// variable > hardware concurrency.  Zero or negative requests mean "auto".
int resolve_thread_count(int requested);

/// Run `body(i)` for i in [0, count).  Each index is executed exactly once;
/// indices write disjoint outputs so results do not depend on the worker
/// count or schedule.  Exceptions from the body are rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  int threads = 0);

}  // namespace sectkit
