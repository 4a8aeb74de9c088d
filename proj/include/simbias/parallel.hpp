#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace simbias::harness {

/// Runs fn(i) for i in [0, count) on `workers` threads. Each call must write
/// only its own slot i, so results do not depend on scheduling. Stops handing
/// out work once *cancel becomes true. Returns which indices completed; the
/// first exception thrown by fn is rethrown after all workers have joined.
template <typename Fn>
std::vector<char> run_indexed(std::size_t count, int workers, const std::atomic<bool>* cancel, Fn&& fn) {
  std::vector<char> done(count, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed) && !(cancel && cancel->load(std::memory_order_relaxed))) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
        done[i] = 1;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return done;
}

}  // namespace simbias::harness
