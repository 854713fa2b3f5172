#pragma once

// Blind modulo unfolding: adaptive LMS predictor, resolution control,
// error-propagation defense, steady-state detection and the full
// encoder/decoder loop.

#include <cstdint>
#include <span>
#include <vector>

#include "modadc/modcore.hpp"
#include "modadc/trace.hpp"

namespace modadc {

/// User-set system parameters. Defaults are those of the Gaussian-input
/// experiment (R=10, alpha0=100, p=40, kappa=4.5, ...).
struct AdcConfig {
  int R = 10;
  double alpha0 = 100.0;
  int p = 40;
  std::vector<double> h0;  // empty means [1, 0, ..., 0]
  double kappa = 4.5;
  int L_s = 40;
  int N_s = 500;
  double eps_mu = 1e-2;
  double delta_alpha = 0.9;
  double beta = 5.0;
  std::uint64_t seed = 0;

  bool steady_state_enabled = true;
  bool adapt_mu = false;      // recompute mu from the running variance every step
  bool freeze_alpha = false;  // hold alpha at alpha0 (no resolution updates)
  DitherMode dither = DitherMode::Random;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  std::vector<double> initial_filter() const;
};

enum StepFlag : unsigned {
  kErrorDetected = 1u << 0,
  kResolutionUp = 1u << 1,
  kResolutionDown = 1u << 2,
  kSteadyState = 1u << 3,
  kReinitializing = 1u << 4,
};

struct StepOutcome {
  double x_hat = 0.0;
  double v_hat = 0.0;
  double v_hat_p = 0.0;
  double e_hat = 0.0;
  double alpha = 0.0;  // resolution the sample was converted with
  unsigned flags = 0;

  bool has(StepFlag f) const { return (flags & f) != 0; }
};

struct BlindPrediction {
  double v_hat;
  double v_hat_p;
};

/// v_hat_p = h . window - 1/2, then unfold y around it.
BlindPrediction blind_unfold_step(double y, std::span<const double> vbar_window,
                                  std::span<const double> h, const ModuloRange& range);

/// h += mu * window * e_hat.
void lms_update(std::span<double> h, double mu, std::span<const double> vbar_window, double e_hat);

double select_learning_rate(double sigma2_vbar_hat, int p, double eps_mu);

struct SigmaEstimate {
  double var;
  double sd;
};

/// Mean square of the residual window and its root.
SigmaEstimate update_sigma_p(std::span<const double> residuals);

/// True iff kappa * sigma_p < delta / 2 (a tie does not raise the resolution).
bool resolution_decision(double sigma_p_hat, double kappa, double delta);

/// Error-event test on the newest standardized sample. Uses
/// sqrt(2 sigma^2 log n) once n_epoch >= N_s and beta * sigma before.
bool overload_detect(double vbar_hat, double sigma2_vbar_hat, std::int64_t n_epoch,
                     std::int64_t N_s, double beta);

/// True iff sigma_bar > M / (2 kappa). Undefined (returns false) before N_s.
bool steady_state_detect(double longterm_sigma_bar, double M, double kappa,
                         std::int64_t n_epoch, std::int64_t N_s);

struct Asymptotics {
  double alpha_inf;
  double M_inf;
  double sigma_lmmse;  // alpha_inf * sigma_bar
  double excess_rate;  // log2(kappa / sqrt(3))
  double rate;         // log2(12 sigma_lmmse^2) / 2 + excess_rate
};

Asymptotics predict_asymptotics(double kappa, int R, double sigma_bar_p_inf);

/// Mean of squares maintained by the recursion
/// s_k = (k-1)/k * s_{k-1} + x_k^2 / k.
class RunningMeanSquare {
 public:
  void push(double x);
  void reset() { count_ = 0, value_ = 0.0; }
  std::int64_t count() const { return count_; }
  double value() const { return value_; }

 private:
  std::int64_t count_ = 0;
  double value_ = 0.0;
};

/// Fixed-capacity window with the newest sample first, exposed as a
/// contiguous span.
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity);
  void push(double v);
  void clear();
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cap_; }
  bool full() const { return size_ == cap_; }
  /// The most recent size() values, newest first.
  std::span<const double> view() const { return {buf_.data() + head_, size_}; }

 private:
  std::size_t cap_;
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Mutable state of the blind decoder.
///
/// The resolution is alpha0 * delta_alpha^-level and the filter is kept per
/// unit resolution, h = alpha * h_unit, so an up step followed by a down step
/// (or a reset to alpha0) restores alpha and h bit for bit.
struct CodecState {
  int level = 0;
  double alpha = 0.0;
  std::vector<double> h_unit;
  SlidingWindow vbar_window;
  double mu = 0.0;
  std::int64_t C_alpha = 0;
  bool steady_flag = false;
  std::int64_t n = 0;        // global sample index of the last decoded sample
  std::int64_t n_epoch = 0;  // samples since the last error-event reset
  std::int64_t t_thresh = 0; // global index at which the current epoch started
  std::int64_t init_remaining = 0;
  RunningMeanSquare run_var;
  SlidingWindow resid_window;
  RunningMeanSquare longterm_resid;

  CodecState(std::size_t p, std::size_t L_s) : vbar_window(p), resid_window(L_s) {}

  double M(const ModuloRange& range) const { return range.delta() / alpha; }
  /// The adaptive filter h_n in v units.
  std::vector<double> h() const;
  void set_h(std::span<const double> h);
};

/// Multiplicative resolution step: up divides alpha and h by delta_alpha,
/// down multiplies them. Requires C_alpha > L_s and no steady-state latch.
void apply_resolution_update(CodecState& state, bool increase, const AdcConfig& config);

class BlindCodec {
 public:
  explicit BlindCodec(AdcConfig config);

  /// Resolution the encoder must apply to the next sample.
  double alpha() const { return state_.alpha; }
  const ModuloRange& range() const { return range_; }
  const AdcConfig& config() const { return config_; }
  const CodecState& state() const { return state_; }

  StepOutcome decode(double y);

 private:
  void begin_epoch();

  AdcConfig config_;
  ModuloRange range_;
  std::vector<double> h_scratch_;
  CodecState state_;
};

struct CodecRun {
  std::vector<TraceRecord> trace;
  RunSummary summary;
};

/// Encodes and decodes a whole signal with the closed resolution loop.
CodecRun run_codec(std::span<const double> signal, const AdcConfig& config);

}  // namespace modadc
