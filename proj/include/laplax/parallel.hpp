#pragma once

// Thread budget and deterministic data-parallel helpers.
//
// Every helper here produces results that do not depend on the number of
// threads: loops write to disjoint slots, and reductions are evaluated over a
// fixed block decomposition whose partial sums are combined in block order.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace laplax {

namespace detail {

inline int threads_from_environment() {
  if (const char* env = std::getenv("LAPLAX_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value > 0) return value;
    } catch (...) {
    }
  }
  return 1;
}

inline std::atomic<int>& thread_budget() {
  static std::atomic<int> budget{threads_from_environment()};
  return budget;
}

}  // namespace detail

inline int num_threads() { return detail::thread_budget().load(std::memory_order_relaxed); }

inline void set_num_threads(int threads) {
  detail::thread_budget().store(std::max(1, threads), std::memory_order_relaxed);
}

// Restores the previous thread budget on scope exit.
class ThreadScope {
public:
  explicit ThreadScope(int threads) : previous_(num_threads()) { set_num_threads(threads); }
  ~ThreadScope() { set_num_threads(previous_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

private:
  int previous_;
};

// Calls body(chunk_begin, chunk_end) over a partition of [begin, end) into at
// most num_threads() contiguous chunks of at least `grain` indices.
template <class Body>
void parallel_chunks(std::size_t begin, std::size_t end, Body&& body, std::size_t grain = 2048) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  const std::size_t max_chunks = std::max<std::size_t>(1, count / std::max<std::size_t>(1, grain));
  const std::size_t chunks = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), max_chunks);
  if (chunks <= 1) {
    body(begin, end);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t c) {
    const std::size_t lo = begin + count * c / chunks;
    const std::size_t hi = begin + count * (c + 1) / chunks;
    try {
      body(lo, hi);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) workers.emplace_back(run, c);
    run(0);
  }
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body, std::size_t grain = 2048) {
  parallel_chunks(
      begin, end,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      },
      grain);
}

// Sum of term(i) over [0, n) with a thread-count independent evaluation order.
template <class Term>
double deterministic_sum(std::size_t n, Term&& term) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  if (blocks <= 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(blocks, 0.0);
  parallel_for(
      0, blocks,
      [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
      },
      1);
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return deterministic_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace laplax
