#pragma once

#include <cstddef>
#include <functional>

namespace lf {

// hardware_concurrency, or LEVYFLUCT_THREADS when set
unsigned worker_count();

// Runs fn(i) for i in [0,n). Each index is computed independently, so the
// result never depends on how indices are spread over threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lf
