#include "pcadb/rng.hpp"

namespace pcadb {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t seed_derive(std::uint64_t master, std::uint64_t index) {
  return mix64(master + kGolden * (index + 1));
}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + kGolden * counter_);
}

}  // namespace pcadb
