#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pcam {

// Deterministic random source with self-contained distribution code.
// std::random distributions are implementation-defined, so uniform/normal
// draws are implemented here to keep every stream bit-stable.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed);

  // Derives an independent stream from (master, purpose, index). Streams for
  // different purposes never share draws, so adding a consumer to one stream
  // does not shift any other.
  static RandomSource derive(std::uint64_t master, std::uint64_t purpose,
                             std::uint64_t index = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01();

  double uniform(double lo, double hi);

  // Unbiased integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller; the spare value is cached.
  double normal();

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(uniform_index(items.size()))];
  }

  // Index draw from an explicit probability vector (sums to 1).
  int categorical(std::span<const double> probs);

 private:
  std::uint64_t state_[2];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// 64-bit mixing used for seed derivation and config hashing.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace pcam
