#pragma once

#include <cstdint>
#include <limits>

namespace pcadb {

// Stateless replicate-seed derivation. Bit-exact definition:
//
//   z = master + 0x9E3779B97F4A7C15 * (index + 1)        (mod 2^64)
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// The finalizer is a bijection on 64-bit words and the multiplier is odd,
// so for a fixed master the map index -> seed is injective, and for a fixed
// index the map master -> seed is injective.
std::uint64_t seed_derive(std::uint64_t master, std::uint64_t index);

// Counter-based generator: the k-th output (k = 1, 2, ...) is the splitmix64
// finalizer applied to key + k * 0x9E3779B97F4A7C15. Two generators with the
// same key produce the same stream regardless of when they are created.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pcadb
