#include "modadc/modcore.hpp"

#include <cmath>
#include <string>

#include "modadc/errors.hpp"

namespace modadc {

namespace {
constexpr double kMaxExactMagnitude = 0x1.0p52;
}

ModuloRange::ModuloRange(int bits) : bits_(bits), delta_(0.0) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw DomainError("modulo range: R must lie in [1, 62], got " + std::to_string(bits));
  }
  delta_ = std::ldexp(1.0, bits);
}

double mod_reduce(double x, double delta) {
  if (!std::isfinite(x) || !std::isfinite(delta) || delta <= 0.0) {
    throw DomainError("mod_reduce: requires finite x and delta > 0");
  }
  double r = x - delta * std::floor(x / delta);
  // Rounding can land exactly on delta for tiny negative x; -0.0 is folded too.
  if (r >= delta || r == 0.0) {
    r = 0.0;
  } else if (r < 0.0) {
    r += delta;
    if (r >= delta) r = 0.0;
  }
  return r;
}

double center_shift(double y, double delta) {
  if (!(y >= 0.0 && y < delta)) {
    throw DomainError("center_shift: y must lie in [0, delta)");
  }
  return mod_reduce(y + 0.5 * delta, delta) - 0.5 * delta;
}

double DitherSource::draw(double scaled) {
  if (mode_ == DitherMode::Deterministic) {
    return std::floor(scaled) - scaled;
  }
  // uniform() is in [0, 1), so -u is in (-1, 0].
  return -rng_.uniform();
}

FoldedSample fold_quantize(double x, double alpha, const ModuloRange& range,
                           DitherSource& dither) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("fold_quantize: alpha must be positive and finite");
  }
  if (!std::isfinite(x)) {
    throw DomainError("fold_quantize: non-finite input");
  }
  const double scaled = alpha * x;
  if (std::fabs(scaled) > kMaxExactMagnitude) {
    throw NumericError("fold_quantize: |alpha*x| exceeds 2^52");
  }
  FoldedSample out{};
  if (dither.mode() == DitherMode::Deterministic) {
    out.v = std::floor(scaled);
    out.z = out.v - scaled;
  } else {
    out.z = dither.draw(scaled);
    out.v = scaled + out.z;
  }
  out.y = mod_reduce(out.v, range.delta());
  return out;
}

Unfolded unfold_with_prediction(double y, double prediction, const ModuloRange& range) {
  const double w = mod_reduce(y - prediction, range.delta());
  const double e_hat = center_shift(w, range.delta());
  return {prediction + e_hat, e_hat};
}

}  // namespace modadc
