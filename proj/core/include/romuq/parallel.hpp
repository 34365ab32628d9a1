#ifndef ROMUQ_PARALLEL_HPP
#define ROMUQ_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace romuq
{

// Run fn(i) for i in [0, n) on a small worker pool. Each task must write only
// to its own output slot; results are then identical for any worker count.
// The first exception thrown by a task is rethrown on the calling thread
// after all workers have drained.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &fn)
{
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace romuq

#endif  // ROMUQ_PARALLEL_HPP
