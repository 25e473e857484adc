#include "sqlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sqlab {

namespace {

std::atomic<int> g_default_threads{0};

int env_threads() {
  const char* s = std::getenv("SQLAB_THREADS");
  if (s == nullptr) return 0;
  try {
    return std::max(0, std::stoi(s));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int default_threads() {
  if (int t = g_default_threads.load(); t > 0) return t;
  if (int t = env_threads(); t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { g_default_threads.store(std::max(0, threads)); }

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t fail_index = count;
  std::exception_ptr fail;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < fail_index) {
          fail_index = i;
          fail = std::current_exception();
        }
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (fail) std::rethrow_exception(fail);
}

}  // namespace sqlab
