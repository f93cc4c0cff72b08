#pragma once
// Shared error handling, environment knobs, and a tiny deterministic worker pool.
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gffpin {

inline constexpr const char* kVersion = "1.0.0";

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Check that throws gffpin::Error with location context on failure.
#define GFFPIN_CHECK(cond, msg)                                         \
  do {                                                                  \
    if (!(cond)) {                                                      \
      std::ostringstream oss_;                                          \
      oss_ << msg;                                                      \
      throw ::gffpin::Error(oss_.str());                                \
    }                                                                   \
  } while (0)

// Worker count: GFFPIN_WORKERS env var, else hardware_concurrency, else 1.
inline int workerCount() {
  if (const char* env = std::getenv("GFFPIN_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n) across workers. Each index writes only its own
// slot in caller-owned storage, so results are identical for any worker count.
inline void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn,
                        int workers = -1) {
  if (workers < 0) workers = workerCount();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr firstError = nullptr;
  std::mutex errMutex;
  int use = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(workers)));
  for (int t = 0; t < use; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(errMutex);
          if (!firstError) firstError = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (firstError) std::rethrow_exception(firstError);
}

}  // namespace gffpin
