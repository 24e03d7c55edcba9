#pragma once

#include <cstddef>
#include <functional>

namespace growup {

// Worker count used when an operation is not given one explicitly; 0 means
// hardware concurrency.
void set_default_workers(int workers);
int default_workers();

// Runs fn(i) for i in [0, n) on contiguous index blocks. Results must be
// written by index; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace growup
