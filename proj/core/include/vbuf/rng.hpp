#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace vbuf {

// Deterministic RNG with hand-rolled distributions. std:: distribution
// objects are implementation-defined, so all sampling goes through the raw
// 64-bit stream to keep artifacts identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range.
  int64_t uniform_int(int64_t lo, int64_t hi)
  {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(eng_() % span);
  }

  // Gumbel(0, 1) via inverse transform; arguments clamped away from 0.
  double gumbel()
  {
    const double u = std::max(uniform(), 1e-300);
    return -std::log(-std::log(u) + 1e-300);
  }

  // Standard normal via Box-Muller.
  double normal()
  {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Named sub-stream: one root seed fans out to per-stage generators.
  static Rng sub(uint64_t root, std::string_view stage)
  {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : stage) {
      h ^= static_cast<uint8_t>(c);
      h *= 1099511628211ull;
    }
    return Rng(root ^ h);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace vbuf
