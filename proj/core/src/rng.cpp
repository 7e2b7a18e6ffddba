#include "pc3/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "pc3/types.hpp"

namespace pc3 {

namespace {

// SplitMix64 finalizer, used only to key child streams.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + uniform01() * (hi - lo);
}

double Rng::gaussian() {
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gaussian(double mean, double stddev) {
  return mean + stddev * gaussian();
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) {
    throw ValidationError("uniform_below requires n > 0");
  }
  const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
  std::uint64_t x = next_u64();
  if (rem != 0) {
    const std::uint64_t limit = 0 - rem;  // largest multiple of n
    while (x >= limit) {
      x = next_u64();
    }
  }
  return x % n;
}

std::size_t Rng::uniform_index(std::size_t n) {
  return static_cast<std::size_t>(uniform_below(n));
}

Rng Rng::derive(std::uint64_t stream) const {
  return Rng(mix64(seed_ ^ mix64(stream)));
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t k) {
  if (k > n) {
    throw ValidationError("cannot sample " + std::to_string(k) + " of " +
                          std::to_string(n) + " without replacement");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = i;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace pc3
