#pragma once

// Seedable input generators and autocorrelation utilities.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modadc/rng.hpp"

namespace modadc {

/// Moving-average Gaussian process x_n = L^{-1/2} * sum_{l<L} xi_{n-l}.
struct MaGaussianSpec {
  int L_x = 15;
  std::uint64_t seed = 0;
};

/// Sinusoidal interferer g*sin(phi + omega*n), active for n > tau.
struct InterfererSpec {
  double g = 0.0;
  double omega = 0.0;
  std::int64_t tau = 0;
  std::uint64_t phase_seed = 0;
};

/// Rademacher noise through a lowpass FIR filter, normalized per realization.
/// Band edges are fractions of the Nyquist frequency.
struct BandlimitedRademacherSpec {
  double passband_edge = 0.2;
  double stopband_edge = 0.3;
  double stopband_atten_db = 60.0;
  std::uint64_t seed = 0;
};

enum class SignalKind { MaGaussian, BandlimitedRademacher };

/// Declarative description of a full input: base process plus interferers.
struct SignalSpec {
  SignalKind kind = SignalKind::MaGaussian;
  MaGaussianSpec ma{};
  BandlimitedRademacherSpec bandlimited{};
  std::vector<InterfererSpec> interferers;
};

/// Streaming MA generator. The first emitted sample is already stationary.
class MaGaussianGenerator {
 public:
  explicit MaGaussianGenerator(const MaGaussianSpec& spec);
  double next();

 private:
  Rng rng_;
  std::vector<double> history_;  // last L_x innovations, ring buffer
  std::size_t head_ = 0;
  double scale_;
};

std::vector<double> gen_ma_gaussian(const MaGaussianSpec& spec, std::size_t n_samples);

/// (1 - |ell|/L_x) for |ell| < L_x, zero otherwise.
double theoretical_autocorr_ma(int L_x, int ell);

struct FirDesign {
  std::vector<double> taps;
  double attenuation_db;  // measured worst-case stopband attenuation
};

/// Kaiser-window lowpass design, verified on a dense frequency grid.
/// Throws DesignError if the attenuation cannot be met within 4096 taps.
FirDesign design_lowpass(double passband_edge, double stopband_edge, double atten_db);

/// Magnitude response |H(e^{j*pi*f})| at normalized frequency f in [0, 1].
double fir_magnitude(std::span<const double> taps, double f);

/// i.i.d. +/-1 driving sequence.
std::vector<double> gen_rademacher(std::uint64_t seed, std::size_t n_samples);

std::vector<double> gen_bandlimited_rademacher(const BandlimitedRademacherSpec& spec,
                                               std::size_t n_samples);

/// Random phase in (0, 2*pi] drawn from the interferer's phase seed.
double interferer_phase(const InterfererSpec& spec);

/// Adds each interferer for samples with index n > tau. Sample i of the
/// sequence has index n = i + 1.
std::vector<double> add_interferers(std::span<const double> signal,
                                    std::span<const InterfererSpec> specs);

/// The three interferers of the narrowband-interference experiment.
std::vector<InterfererSpec> default_interferers(std::uint64_t seed);

/// Biased sample autocorrelation R[l] = (1/N) sum_n x_n x_{n-l}, l = 0..max_lag.
std::vector<double> sample_autocorr(std::span<const double> signal, std::size_t max_lag);

/// Generates the base process named by `spec` and adds its interferers.
std::vector<double> generate_signal(const SignalSpec& spec, std::size_t n_samples);

std::string to_string(SignalKind kind);
SignalKind signal_kind_from_string(const std::string& name);

}  // namespace modadc
