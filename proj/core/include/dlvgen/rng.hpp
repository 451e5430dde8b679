#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dlvgen {

// SplitMix64 finalizer. Used to derive independent seeds for sub-streams.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// All stochastic choices draw from this generator. The engine is
// std::mt19937_64, whose output sequence is fixed by the C++ standard;
// uniform and normal variates are derived here (53-bit mantissa uniforms and
// the polar Box-Muller method) instead of through the <random> distributions,
// whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  std::vector<double> normal_vector(std::size_t n);

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dlvgen
