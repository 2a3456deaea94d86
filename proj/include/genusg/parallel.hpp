#pragma once

#include <cstddef>
#include <functional>

namespace genusg {

/// Worker count used by library loops; 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. The first
/// exception thrown by any iteration is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace genusg
