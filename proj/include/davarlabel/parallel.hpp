#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace davar {

/// Worker count: DAVAR_LABEL_THREADS when set (clamped to >= 1), otherwise
/// the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DAVAR_LABEL_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Apply fn to every index in [0, n); results land at their input index so
/// output order never depends on the schedule. fn must not throw.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<Result> results(n);
  const unsigned workers =
      std::min<std::size_t>(worker_count(), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) results[i] = fn(i);
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace davar
