#pragma once

#include <cstddef>
#include <functional>

namespace tubecomp {

enum class Execution { Serial, Parallel };

// Worker count for parallel kernels: TUBECOMP_THREADS when set to a positive integer, otherwise
// the OpenMP default.
int thread_limit();

// Runs body(i) for i in [0, count). The first exception thrown by any iteration is rethrown
// after the loop.
void parallel_for(std::size_t count, Execution exec, const std::function<void(std::size_t)>& body);

}  // namespace tubecomp
