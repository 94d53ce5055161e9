#include "pcam/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pcam {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  s ^= c + 0xd1b54a32d192ed03ULL;
  h ^= splitmix64(s);
  return h;
}

RandomSource::RandomSource(std::uint64_t seed) {
  std::uint64_t s = seed;
  state_[0] = splitmix64(s);
  state_[1] = splitmix64(s);
  if (state_[0] == 0 && state_[1] == 0) state_[0] = 1;
}

RandomSource RandomSource::derive(std::uint64_t master, std::uint64_t purpose,
                                  std::uint64_t index) {
  return RandomSource(mix_seed(master, purpose, index));
}

// xoroshiro128++
std::uint64_t RandomSource::next_u64() {
  auto rotl = [](std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  };
  const std::uint64_t s0 = state_[0];
  std::uint64_t s1 = state_[1];
  const std::uint64_t result = rotl(s0 + s1, 17) + s0;
  s1 ^= s0;
  state_[0] = rotl(s0, 49) ^ s1 ^ (s1 << 21);
  state_[1] = rotl(s1, 28);
  return result;
}

double RandomSource::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  // Lemire multiply-shift with rejection of the biased zone.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (lo < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RandomSource::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int RandomSource::categorical(std::span<const double> probs) {
  const double u = uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace pcam
