#pragma once

#include <functional>

namespace nematic {

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads. The first
/// exception thrown by any call is rethrown after all workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace nematic
