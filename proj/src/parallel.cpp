#include "crosscurve/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace crosscurve {

int worker_threads() {
  if (const char* env = std::getenv("CROSSCURVE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(long n, const std::function<void(long)>& f) {
  int nt = worker_threads();
  if (n <= 1 || nt <= 1) {
    for (long i = 0; i < n; ++i) f(i);
    return;
  }

  std::atomic<long> next(0);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  long first_error_index = -1;

  auto worker = [&] {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        // keep the smallest-index failure so reruns raise the same error
        if (first_error_index < 0 || i < first_error_index) {
          first_error = std::current_exception();
          first_error_index = i;
        }
      }
    }
  };

  std::vector<std::thread> pool;
  int spawn = static_cast<int>(std::min<long>(nt, n));
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace crosscurve
