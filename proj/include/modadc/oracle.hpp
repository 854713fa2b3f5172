#pragma once

// The informed decoder: LMMSE prediction from a known autocorrelation,
// oracle unfolding, and the analytical overload/distortion bounds.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "modadc/modcore.hpp"
#include "modadc/signals.hpp"

namespace modadc {

using Autocorrelation = std::function<double(int)>;

/// Optimal length-p predictor of v_n from the standardized past window
/// [vbar_{n-1}, ..., vbar_{n-p}], vbar = (v + 1/2) / alpha.
struct LmmseSolution {
  std::vector<double> h_opt;
  double sigma2_lmmse = 0.0;  // MSE of predicting v_n, in v units
  double alpha = 1.0;
};

/// Solves the Toeplitz normal equations built from
/// R_vbar[l] = R_x[l] + [l == 0] / (12 alpha^2).
LmmseSolution lmmse_filter(const Autocorrelation& autocorr, double alpha, int p);

/// Linear prediction of v_n from the true previous unfolded values
/// v_window = [v_{n-1}, ..., v_{n-p}].
double oracle_prediction(std::span<const double> v_window, const LmmseSolution& sol);

/// One step of oracle modulo unfolding. Returns the recovered v.
double oracle_unfold_step(double y, std::span<const double> v_window, const LmmseSolution& sol,
                          const ModuloRange& range);

/// Upper bound 2*exp(-3/2 * 2^{2(R - log2(12 sigma^2)/2)}) on the overload
/// probability of the informed decoder, clamped to [0, 1].
double overload_bound(int R, double sigma2_lmmse);

/// Conditional distortion bound 1 / (12 alpha^2 (1 - p_overload)).
double distortion_bound(double alpha, double p_overload);

/// Gaussian upper-tail probability Q(x).
double q_function(double x);

struct InformedRunStats {
  std::uint64_t n = 0;
  std::uint64_t n_overload = 0;
  double overload_rate = 0.0;
  double prediction_mse = 0.0;          // mean (v - prediction)^2 over all samples
  double mse_v_unconditional = 0.0;     // mean (v_hat - v)^2 over all samples
  double distortion_conditional = 0.0;  // mean (x - x_hat)^2 given no overload
};

/// Runs the informed decoder over an MA-Gaussian input with a fixed alpha.
/// Each step sees the true previous p values of v, as the oracle assumes.
InformedRunStats simulate_informed_decoder(const MaGaussianSpec& signal, const LmmseSolution& sol,
                                           const ModuloRange& range, std::uint64_t dither_seed,
                                           std::uint64_t n_samples);

}  // namespace modadc
