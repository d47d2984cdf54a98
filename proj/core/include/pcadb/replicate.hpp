#pragma once

// Order-independent replicate execution. Results land in a vector indexed by
// replicate number, so aggregates computed afterwards (pairwise summation in
// index order) do not depend on thread scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

namespace pcadb {

// Process-wide cap on concurrent replicates; 0 or negative resets to 1.
void set_default_jobs(int jobs);
int default_jobs();

template <class F>
auto parallel_map(int count, F&& fn, int jobs = 0)
    -> std::vector<std::invoke_result_t<F&, int>> {
  using Result = std::invoke_result_t<F&, int>;
  std::vector<Result> out(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return out;
  const int width = std::clamp(jobs > 0 ? jobs : default_jobs(), 1, count);
  if (width == 1) {
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::jthread> threads;
  threads.reserve(static_cast<std::size_t>(width));
  for (int t = 0; t < width; ++t) threads.emplace_back(worker);
  threads.clear();
  if (error) std::rethrow_exception(error);
  return out;
}

// Pairwise (cascade) summation over the span in index order.
double pairwise_sum(std::span<const double> values);

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(count)
  double sd = 0.0;
  int count = 0;
};

MeanAndError mean_and_error(std::span<const double> values);

}  // namespace pcadb
