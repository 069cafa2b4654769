#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace omplab {

// splitmix64 finalizer; the stream-splitting rule used everywhere is
// subseed(base, k) so serial and parallel schedules see identical draws.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t subseed(std::uint64_t base, std::uint64_t a) {
  return mix64(base ^ mix64(a + 0x51ed2701u));
}

constexpr std::uint64_t subseed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return subseed(subseed(base, a), b);
}

// mt19937_64 with portable uniform/normal draws. Normals come from
// Box-Muller on 53-bit uniforms: std::normal_distribution streams are
// implementation-defined and would break bit-reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so log is finite
    double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // uniform in [0, bound), bias-free
  int uniform_int(int bound) {
    auto b = static_cast<std::uint64_t>(bound);
    std::uint64_t threshold = (0 - b) % b;
    for (;;) {
      std::uint64_t x = engine_();
      if (x >= threshold) return static_cast<int>(x % b);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace omplab
