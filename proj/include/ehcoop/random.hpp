#pragma once

#include <cstdint>
#include <random>

namespace ehcoop {

// Finalizer of the splitmix64 generator; good avalanche, cheap, and
// stable across platforms. Used to derive de-correlated child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Child seed for stream or replication `index` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ull);
}

// One reproducible Bernoulli/uniform source. Uniforms take the top 53
// bits of mt19937_64 output, so draws are identical on every platform
// (std::bernoulli_distribution is implementation-defined and avoided).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ehcoop
