#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace modadc {

/// One row of the per-sample log. Initialization samples have no linear
/// prediction, so v_hat_p and e_hat are NaN there.
struct TraceRecord {
  std::int64_t n = 0;
  double x = 0.0;
  double v = 0.0;
  double y = 0.0;
  double v_hat = 0.0;
  double v_hat_p = 0.0;
  double e_hat = 0.0;
  double alpha = 0.0;
  double M = 0.0;
  bool flag_error = false;
  bool flag_res_up = false;
  bool flag_res_down = false;
  bool flag_steady = false;
  bool flag_reinit = false;
};

struct RunSummary {
  std::int64_t n_samples = 0;
  std::int64_t n_wrong = 0;           // samples with |v_hat - v| >= 1e-6
  double empirical_error_prob = 0.0;  // n_wrong / n_samples
  double mean_sq_v_error = 0.0;
  double tail_mean_M = 0.0;  // mean M over the final 20% of samples
  std::int64_t n_error_events = 0;
  std::int64_t n_resolution_ups = 0;
  std::int64_t n_resolution_downs = 0;
  // Onset of the steady-state period in effect at the end of the run.
  std::optional<std::int64_t> steady_state_index;
  double sigma_bar_p = 0.0;      // long-term residual RMS of the final epoch, vbar units
  double predicted_M_inf = 0.0;  // 2 * kappa * sigma_bar_p
};

/// Absolute tolerance below which a recovered sample counts as exact.
inline constexpr double kExactRecoveryTol = 1e-6;

/// Recomputes every summary field from a trace and the ground-truth v.
RunSummary compute_metrics(std::span<const TraceRecord> trace, std::span<const double> truth_v,
                           double kappa);

/// Long-term residual RMS over the last error-free epoch of a trace.
double final_epoch_sigma_bar(std::span<const TraceRecord> trace);

}  // namespace modadc
