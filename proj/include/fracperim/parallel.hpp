#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fracperim {

/// Runs `work(chunk_index)` for every chunk in [0, n_chunks) on up to `threads`
/// workers and returns the per-chunk results in chunk order. Callers combine the
/// results sequentially, which keeps floating-point reductions independent of
/// the worker count.
template <typename Result, typename Work>
std::vector<Result> run_chunks(std::size_t n_chunks, int threads, Work&& work) {
  std::vector<Result> results(n_chunks);
  const std::size_t n_workers =
      std::min<std::size_t>(n_chunks, static_cast<std::size_t>(std::max(1, threads)));
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) results[i] = work(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_chunks) return;
      try {
        results[i] = work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_chunks;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// Running mean and centered second moment (Welford / Chan), merged in a fixed
/// order so the result is reproducible.
struct MomentAccumulator {
  double mean_value = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;

  void add(double x) {
    ++count;
    const double delta = x - mean_value;
    mean_value += delta / static_cast<double>(count);
    m2 += delta * (x - mean_value);
  }
  void merge(const MomentAccumulator& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n_a = static_cast<double>(count);
    const double n_b = static_cast<double>(other.count);
    const double n = n_a + n_b;
    const double delta = other.mean_value - mean_value;
    mean_value += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
  }
  double mean() const { return mean_value; }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  /// Standard error of the mean.
  double std_error() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

}  // namespace fracperim
