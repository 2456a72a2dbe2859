#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace errw {

enum class ExecMode { Serial, Parallel };

// Runs fn(i) for i in [0,n). Workers must write results into per-index slots;
// under that contract the two modes produce identical output, which the tests
// assert. Exceptions from parallel workers are captured and rethrown once.
template <class F>
void run_indexed(int n, ExecMode mode, F&& fn) {
  if (mode == ExecMode::Serial) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::string> errors(static_cast<size_t>(n));
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(i)] = e.what();
      failed = true;
    } catch (...) {
      errors[static_cast<size_t>(i)] = "unknown error";
      failed = true;
    }
  }
  if (failed) {
    for (const auto& e : errors)
      if (!e.empty()) throw std::runtime_error("parallel worker failed: " + e);
  }
}

inline void set_worker_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace errw
