#pragma once

#include <cmath>
#include <cstdint>

namespace patchdyn {

// Multiplier used to derive independent stream seeds: the i-th parallel work
// item runs with seed' = seed ^ (kSeedStream * (i + 1)).  Sweeps and ensembles
// document their index layout against this rule so runs are reproducible.
inline constexpr std::uint64_t kSeedStream = 0x9E3779B97F4A7C15ull;

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return base ^ (kSeedStream * (index + 1));
}

// SplitMix64 stream with a hand-rolled Box-Muller transform.  Both are fixed
// algorithms (not implementation-defined like std::normal_distribution), so a
// seed pins the exact sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace patchdyn
