#pragma once

#include <cstddef>
#include <functional>

namespace toric {

// global worker count; 0 means "use hardware concurrency"
void set_thread_count(int n);
int thread_count();

// Calls body(i) for i in [0, n). Work is split into contiguous static chunks,
// so anything written per index is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace toric
