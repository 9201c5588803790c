#include "tubecomp/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

namespace tubecomp {

int thread_limit() {
  if (const char* env = std::getenv("TUBECOMP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

void parallel_for(std::size_t count, Execution exec, const std::function<void(std::size_t)>& body) {
  if (exec == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::atomic<bool> failed{false};
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(thread_limit())
  for (long i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tubecomp
