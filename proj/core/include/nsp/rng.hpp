#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nsp {

// Derives an independent 64-bit seed for a named substream, e.g.
// derive_seed(42, "init") or derive_seed(42, "synth/eeg", trial_index).
// Substreams let each component be reproduced without replaying the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

// xoshiro256** seeded through splitmix64. Distributions are implemented
// here rather than taken from <random> because the standard distributions
// are implementation-defined, and synthetic data files must be bit-exact
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates shuffle driven by Rng.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  shuffle(std::span<T>(items), rng);
}

}  // namespace nsp
