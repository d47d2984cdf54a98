#include "pcadb/replicate.hpp"

#include <cmath>

namespace pcadb {

namespace {
std::atomic<int> g_default_jobs{1};
}

void set_default_jobs(int jobs) { g_default_jobs.store(jobs > 0 ? jobs : 1); }

int default_jobs() { return g_default_jobs.load(); }

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MeanAndError mean_and_error(std::span<const double> values) {
  MeanAndError out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = pairwise_sum(values) / n;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = values[i] - out.mean;
    sq[i] = dev * dev;
  }
  out.sd = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  out.std_error = out.sd / std::sqrt(n);
  return out;
}

}  // namespace pcadb
