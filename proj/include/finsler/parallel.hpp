#pragma once

// Node loops over grids. Work is split statically; if any node throws, the
// exception from the lowest failing index is rethrown after the loop, so
// error reports do not depend on the thread count.

#include <cstddef>
#include <exception>
#include <limits>

namespace finsler {

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t first = kNone;
  std::exception_ptr error;
#pragma omp parallel
  {
    std::size_t local_first = kNone;
    std::exception_ptr local_error;
#pragma omp for schedule(static)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      if (local_first != kNone) continue;
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        local_first = static_cast<std::size_t>(i);
        local_error = std::current_exception();
      }
    }
#pragma omp critical(finsler_parallel_for)
    if (local_first < first) {
      first = local_first;
      error = local_error;
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace finsler
