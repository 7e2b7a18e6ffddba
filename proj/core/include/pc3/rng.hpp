#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pc3 {

// Deterministic random stream with a fixed, documented algorithm so one seed
// names the same stream everywhere. The raw engine is std::mt19937_64
// (bit-exact per the C++ standard); every distribution is hand-rolled on top
// of its 64-bit output instead of using std::*_distribution, whose results
// vary between standard libraries:
//
//   uniform01()       (next_u64() >> 11) * 2^-53, in [0, 1)
//   uniform_below(n)  rejection-sampled modulo, unbiased over [0, n)
//   gaussian()        Box-Muller: sqrt(-2 ln(1-u1)) * cos(2 pi u2)
//
// derive(k) keys a child stream off the original seed (not the consumed
// engine state), so sub-streams replay identically no matter how much of the
// parent stream has been used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  double uniform01();
  double uniform(double lo, double hi);
  double gaussian();
  double gaussian(double mean, double stddev);

  // Unbiased draw from [0, n). Throws ValidationError when n == 0.
  std::uint64_t uniform_below(std::uint64_t n);
  std::size_t uniform_index(std::size_t n);

  Rng derive(std::uint64_t stream) const;

  // Fisher-Yates permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

  // k distinct indices from [0, n), uniformly, returned sorted ascending.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace pc3
