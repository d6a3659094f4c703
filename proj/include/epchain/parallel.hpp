#pragma once

#include <cstddef>
#include <functional>

namespace epchain {

// Worker count: EPCHAIN_THREADS if set and positive, else hardware concurrency.
int thread_budget();

// Runs fn(i) for i in [0, n) on up to thread_budget() threads. The first
// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace epchain
