#pragma once

#include <cstddef>
#include <functional>

namespace snspd {

// Worker count: SNSPD_THREADS if set, else the hardware concurrency.
int worker_count();

// Runs body(i) for i in [0, n). Each index writes only its own output slot, so
// results do not depend on the number of workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace snspd
