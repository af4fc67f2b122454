// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_PARALLEL_HPP
#define EPINFER_PARALLEL_HPP

#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace epinfer {

// Applies fn(i) for i in [0, n) across up to n_threads workers on contiguous
// index blocks. Every fn(i) must write only to slot i of shared outputs, so
// results cannot depend on the partition. The first exception thrown by any
// worker is rethrown after all workers join.
template <typename Fn>
void parallel_for(int n, int n_threads, Fn &&fn) {
  if (n <= 0) return;
  const int workers = std::min(n_threads < 1 ? 1 : n_threads, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(lo + chunk, n);
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto &worker : pool) worker.join();
  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace epinfer

#endif  // EPINFER_PARALLEL_HPP
