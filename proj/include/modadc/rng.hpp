#pragma once

#include <cstdint>
#include <random>

namespace modadc {

/// Derives an independent 64-bit seed for a named sub-stream (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Seedable generator with portable transforms.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The uniform and normal transforms are implemented here rather
/// than through std::*_distribution, whose algorithms differ between
/// standard libraries, so a seed gives the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// +1 or -1 with equal probability.
  double rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace modadc
