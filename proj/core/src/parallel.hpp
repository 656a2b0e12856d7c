#pragma once

#include <exception>

#include "lavdm/types.hpp"

namespace lavdm::detail {

// Runs body(i) for i in [0, n), in parallel when OpenMP is enabled. The first
// exception thrown by any iteration is rethrown on the calling thread.
template <typename Body>
void parallel_for(Index n, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(lavdm_parallel_for)
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lavdm::detail
