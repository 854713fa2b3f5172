#pragma once

// Modulo arithmetic and the dithered folding quantizer that models the
// front-end of a modulo ADC as a stochastic channel.

#include <cstdint>

#include "modadc/rng.hpp"

namespace modadc {

/// Fixed modulo range of an R-bit converter, delta = 2^R.
class ModuloRange {
 public:
  static constexpr int kMinBits = 1;
  static constexpr int kMaxBits = 62;

  explicit ModuloRange(int bits);

  int bits() const { return bits_; }
  double delta() const { return delta_; }
  double half() const { return 0.5 * delta_; }

 private:
  int bits_;
  double delta_;
};

/// x - delta * floor(x / delta), always in [0, delta).
double mod_reduce(double x, double delta);

/// Maps y in [0, delta) to ([y + delta/2] mod delta) - delta/2 in [-delta/2, delta/2).
double center_shift(double y, double delta);

enum class DitherMode { Random, Deterministic };

/// Quantization-error source z in (-1, 0].
///
/// Random mode draws z ~ Unif((-1, 0]) independently per sample (the
/// stochastic channel model). Deterministic mode returns the actual error
/// of the floor quantizer, floor(a) - a.
class DitherSource {
 public:
  explicit DitherSource(std::uint64_t seed, DitherMode mode = DitherMode::Random)
      : rng_(seed), mode_(mode) {}

  DitherMode mode() const { return mode_; }

  /// Dither for the scaled input `scaled` (= alpha * x).
  double draw(double scaled);

 private:
  Rng rng_;
  DitherMode mode_;
};

struct FoldedSample {
  double y;  // converter output, [v] mod 2^R
  double v;  // unfolded quantized value alpha*x + z
  double z;  // quantization error
};

/// Scales, dithers and folds one input sample.
///
/// Throws NumericError when |alpha*x| exceeds 2^52, where doubles no longer
/// resolve the unit quantization step.
FoldedSample fold_quantize(double x, double alpha, const ModuloRange& range,
                           DitherSource& dither);

struct Unfolded {
  double v_hat;  // prediction + e_hat
  double e_hat;  // center_shift([y - prediction] mod delta)
};

/// Recovers the unfolded value from its folded observation and a prediction.
/// Exact whenever |v - prediction| < delta/2.
Unfolded unfold_with_prediction(double y, double prediction, const ModuloRange& range);

}  // namespace modadc
