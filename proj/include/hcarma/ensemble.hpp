#pragma once

// Deterministic parallel map over path indices: path i always draws from
// path_rng(base_seed, i) and its result lands in slot i, whatever the thread
// count.

#include "hcarma/noise.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hcarma {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class R, class F>
std::vector<R> run_ensemble(std::size_t count, std::uint64_t base_seed, unsigned threads,
                            F&& f) {
  std::vector<R> out(count);
  const unsigned n = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < count; i += n) {
        Rng rng = path_rng(base_seed, i);
        out[i] = f(i, rng);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (n <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hcarma
