#ifndef LOSSCURV_SRC_PARALLEL_FOR_HPP_
#define LOSSCURV_SRC_PARALLEL_FOR_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace losscurv::detail {

// Runs fn(i) once for every i in [0, n). Work items must write only to
// their own output slot; the caller reduces slots in index order afterwards,
// so results do not depend on the thread count.
template <typename F>
void parallel_for(int n, int threads, F&& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace losscurv::detail

#endif  // LOSSCURV_SRC_PARALLEL_FOR_HPP_
