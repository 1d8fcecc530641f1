#pragma once

#include <cstdint>
#include <string_view>

namespace occlusym {

// Portable seeded generator. The state update is xoshiro256** seeded through
// splitmix64; every distribution below is implemented here so that a given
// seed yields the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in the closed range [lo, hi]. Unbiased (rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Sub-seed for a named role: splitmix64(seed ^ fnv1a64(role)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role, std::uint64_t index);

}  // namespace occlusym
