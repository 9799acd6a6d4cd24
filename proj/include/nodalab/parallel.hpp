#pragma once

#include <functional>

namespace nodalab {

/// Worker count for parallel_for. Defaults to NODALAB_THREADS, else the
/// hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs body(0..n-1) on the worker pool. Nested calls run serially. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace nodalab
