#include "modadc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "modadc/errors.hpp"

namespace modadc {

MaGaussianGenerator::MaGaussianGenerator(const MaGaussianSpec& spec)
    : rng_(spec.seed), history_(), scale_(0.0) {
  if (spec.L_x < 1) {
    throw DomainError("ma_gaussian: L_x must be >= 1");
  }
  history_.assign(static_cast<std::size_t>(spec.L_x), 0.0);
  scale_ = 1.0 / std::sqrt(static_cast<double>(spec.L_x));
  // Warm-up: L_x - 1 innovations so the first output spans a full window.
  for (int i = 0; i + 1 < spec.L_x; ++i) {
    const double xi = rng_.normal();
    history_[head_] = xi;
    head_ = (head_ + 1) % history_.size();
  }
}

double MaGaussianGenerator::next() {
  history_[head_] = rng_.normal();
  head_ = (head_ + 1) % history_.size();
  // Summing the window directly avoids drift from a running sum.
  double s = 0.0;
  for (double v : history_) s += v;
  return scale_ * s;
}

std::vector<double> gen_ma_gaussian(const MaGaussianSpec& spec, std::size_t n_samples) {
  MaGaussianGenerator gen(spec);
  std::vector<double> out(n_samples);
  for (auto& v : out) v = gen.next();
  return out;
}

double theoretical_autocorr_ma(int L_x, int ell) {
  if (L_x < 1) throw DomainError("theoretical_autocorr_ma: L_x must be >= 1");
  const int a = ell < 0 ? -ell : ell;
  if (a >= L_x) return 0.0;
  return 1.0 - static_cast<double>(a) / static_cast<double>(L_x);
}

double fir_magnitude(std::span<const double> taps, double f) {
  const double w = std::numbers::pi * f;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    re += taps[k] * std::cos(w * static_cast<double>(k));
    im -= taps[k] * std::sin(w * static_cast<double>(k));
  }
  return std::hypot(re, im);
}

namespace {

constexpr std::size_t kMaxTaps = 4096;

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) {
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  }
  return 0.0;
}

std::vector<double> kaiser_lowpass(std::size_t n_taps, double cutoff, double beta) {
  std::vector<double> h(n_taps);
  const double mid = 0.5 * static_cast<double>(n_taps - 1);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  double dc = 0.0;
  for (std::size_t k = 0; k < n_taps; ++k) {
    const double t = static_cast<double>(k) - mid;
    const double ideal = t == 0.0 ? cutoff
                                  : std::sin(std::numbers::pi * cutoff * t) / (std::numbers::pi * t);
    const double r = mid > 0.0 ? t / mid : 0.0;
    const double win = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[k] = ideal * win;
    dc += h[k];
  }
  for (auto& v : h) v /= dc;
  return h;
}

// Worst stopband gain relative to unity passband, in dB of attenuation.
double measured_attenuation(std::span<const double> taps, double stopband_edge) {
  constexpr int kGrid = 4096;
  double worst = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double f = stopband_edge + (1.0 - stopband_edge) * i / kGrid;
    worst = std::max(worst, fir_magnitude(taps, f));
  }
  return worst > 0.0 ? -20.0 * std::log10(worst) : 400.0;
}

}  // namespace

FirDesign design_lowpass(double passband_edge, double stopband_edge, double atten_db) {
  if (!(passband_edge > 0.0 && passband_edge < stopband_edge && stopband_edge < 1.0)) {
    throw DomainError("design_lowpass: need 0 < passband_edge < stopband_edge < 1");
  }
  if (!(atten_db > 0.0)) {
    throw DomainError("design_lowpass: attenuation must be positive");
  }
  const double transition = std::numbers::pi * (stopband_edge - passband_edge);
  const double beta = kaiser_beta(atten_db);
  const double cutoff = 0.5 * (passband_edge + stopband_edge);
  auto n_est = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * transition))) + 1;
  n_est = std::max<std::size_t>(n_est, 3);
  if (n_est % 2 == 0) ++n_est;
  // The Kaiser estimate is occasionally a few taps short; grow until verified.
  for (std::size_t n = n_est; n <= kMaxTaps; n += 2) {
    auto taps = kaiser_lowpass(n, cutoff, beta);
    const double att = measured_attenuation(taps, stopband_edge);
    if (att >= atten_db) return {std::move(taps), att};
  }
  throw DesignError("design_lowpass: band edges too close for the requested attenuation within 4096 taps");
}

std::vector<double> gen_rademacher(std::uint64_t seed, std::size_t n_samples) {
  Rng rng(seed);
  std::vector<double> out(n_samples);
  for (auto& v : out) v = rng.rademacher();
  return out;
}

std::vector<double> gen_bandlimited_rademacher(const BandlimitedRademacherSpec& spec,
                                               std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("bandlimited_rademacher: need at least 2 samples");
  const FirDesign fir = design_lowpass(spec.passband_edge, spec.stopband_edge, spec.stopband_atten_db);
  const std::size_t L = fir.taps.size();
  // L - 1 extra driver samples so every output sees a full filter span.
  const auto drive = gen_rademacher(spec.seed, n_samples + L - 1);
  std::vector<double> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    double acc = 0.0;
    const std::size_t newest = i + L - 1;
    for (std::size_t k = 0; k < L; ++k) acc += fir.taps[k] * drive[newest - k];
    out[i] = acc;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
  double ss = 0.0;
  for (auto& v : out) {
    v -= mean;
    ss += v * v;
  }
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) throw NumericError("bandlimited_rademacher: degenerate realization");
  for (auto& v : out) v /= sd;
  return out;
}

double interferer_phase(const InterfererSpec& spec) {
  Rng rng(spec.phase_seed);
  return 2.0 * std::numbers::pi * (1.0 - rng.uniform());
}

std::vector<double> add_interferers(std::span<const double> signal,
                                    std::span<const InterfererSpec> specs) {
  std::vector<double> out(signal.begin(), signal.end());
  for (const auto& s : specs) {
    const double phi = interferer_phase(s);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto n = static_cast<std::int64_t>(i) + 1;
      if (n > s.tau) out[i] += s.g * std::sin(phi + s.omega * static_cast<double>(n));
    }
  }
  return out;
}

std::vector<InterfererSpec> default_interferers(std::uint64_t seed) {
  constexpr double pi = std::numbers::pi;
  return {
      {2.0, pi / 4.0, 20000, derive_seed(seed, 101)},
      {2.0, 4.0 * pi / 5.0, 40000, derive_seed(seed, 102)},
      {2.0, std::numbers::sqrt2 * pi / 3.0, 70000, derive_seed(seed, 103)},
  };
}

std::vector<double> sample_autocorr(std::span<const double> signal, std::size_t max_lag) {
  const std::size_t N = signal.size();
  if (max_lag >= N) throw DomainError("sample_autocorr: max_lag must be < signal length");
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t l = 0; l <= max_lag; ++l) {
    double acc = 0.0;
    for (std::size_t n = l; n < N; ++n) acc += signal[n] * signal[n - l];
    r[l] = acc / static_cast<double>(N);
  }
  return r;
}

std::vector<double> generate_signal(const SignalSpec& spec, std::size_t n_samples) {
  std::vector<double> base;
  switch (spec.kind) {
    case SignalKind::MaGaussian:
      base = gen_ma_gaussian(spec.ma, n_samples);
      break;
    case SignalKind::BandlimitedRademacher:
      base = gen_bandlimited_rademacher(spec.bandlimited, n_samples);
      break;
  }
  if (spec.interferers.empty()) return base;
  return add_interferers(base, spec.interferers);
}

std::string to_string(SignalKind kind) {
  return kind == SignalKind::MaGaussian ? "ma_gaussian" : "bandlimited_rademacher";
}

SignalKind signal_kind_from_string(const std::string& name) {
  if (name == "ma_gaussian") return SignalKind::MaGaussian;
  if (name == "bandlimited_rademacher") return SignalKind::BandlimitedRademacher;
  throw ConfigError("unknown signal kind '" + name + "'");
}

}  // namespace modadc
