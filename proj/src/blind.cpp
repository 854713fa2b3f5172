#include "modadc/blind.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "modadc/errors.hpp"
#include "modadc/rng.hpp"

namespace modadc {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config field '" + field + "': " + what);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void AdcConfig::validate() const {
  require(R >= ModuloRange::kMinBits && R <= ModuloRange::kMaxBits, "R", "must lie in [1, 62]");
  require(alpha0 > 0.0 && std::isfinite(alpha0), "alpha0", "must be positive");
  require(p >= 1, "p", "must be >= 1");
  require(h0.empty() || h0.size() == static_cast<std::size_t>(p), "h0", "length must equal p");
  require(kappa > 0.0 && std::isfinite(kappa), "kappa", "must be positive");
  require(L_s >= 1, "L_s", "must be >= 1");
  require(N_s >= 1, "N_s", "must be >= 1");
  require(eps_mu > 0.0 && std::isfinite(eps_mu), "eps_mu", "must be positive");
  require(delta_alpha > 0.0 && delta_alpha < 1.0, "delta_alpha", "must lie in (0, 1)");
  require(beta > 0.0 && std::isfinite(beta), "beta", "must be positive");
}

std::vector<double> AdcConfig::initial_filter() const {
  if (!h0.empty()) return h0;
  std::vector<double> h(static_cast<std::size_t>(p), 0.0);
  h[0] = 1.0;
  return h;
}

BlindPrediction blind_unfold_step(double y, std::span<const double> vbar_window,
                                  std::span<const double> h, const ModuloRange& range) {
  if (vbar_window.size() != h.size()) {
    throw DomainError("blind_unfold_step: window and filter lengths differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) acc += h[i] * vbar_window[i];
  const double v_hat_p = acc - 0.5;
  return {unfold_with_prediction(y, v_hat_p, range).v_hat, v_hat_p};
}

void lms_update(std::span<double> h, double mu, std::span<const double> vbar_window, double e_hat) {
  if (vbar_window.size() != h.size()) {
    throw DomainError("lms_update: window and filter lengths differ");
  }
  const double g = mu * e_hat;
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += g * vbar_window[i];
}

double select_learning_rate(double sigma2_vbar_hat, int p, double eps_mu) {
  if (!(sigma2_vbar_hat > 0.0)) throw StateError("select_learning_rate: variance must be positive");
  if (p < 1) throw DomainError("select_learning_rate: p must be >= 1");
  return eps_mu / (static_cast<double>(p) * sigma2_vbar_hat);
}

SigmaEstimate update_sigma_p(std::span<const double> residuals) {
  if (residuals.empty()) throw StateError("update_sigma_p: empty residual window");
  double acc = 0.0;
  for (double r : residuals) acc += r * r;
  const double var = acc / static_cast<double>(residuals.size());
  return {var, std::sqrt(var)};
}

bool resolution_decision(double sigma_p_hat, double kappa, double delta) {
  return kappa * sigma_p_hat < 0.5 * delta;
}

bool overload_detect(double vbar_hat, double sigma2_vbar_hat, std::int64_t n_epoch,
                     std::int64_t N_s, double beta) {
  if (!(sigma2_vbar_hat > 0.0)) throw StateError("overload_detect: variance must be positive");
  if (n_epoch < 1) throw StateError("overload_detect: epoch index must be >= 1");
  const double mag = std::fabs(vbar_hat);
  if (n_epoch >= N_s) {
    return mag > std::sqrt(2.0 * sigma2_vbar_hat * std::log(static_cast<double>(n_epoch)));
  }
  return mag > beta * std::sqrt(sigma2_vbar_hat);
}

bool steady_state_detect(double longterm_sigma_bar, double M, double kappa, std::int64_t n_epoch,
                         std::int64_t N_s) {
  if (n_epoch < N_s) return false;
  return longterm_sigma_bar > M / (2.0 * kappa);
}

Asymptotics predict_asymptotics(double kappa, int R, double sigma_bar_p_inf) {
  if (!(kappa > 0.0) || !(sigma_bar_p_inf > 0.0)) {
    throw DomainError("predict_asymptotics: inputs must be positive");
  }
  Asymptotics a{};
  const double delta = std::ldexp(1.0, R);
  a.alpha_inf = (0.5 * delta) / (kappa * sigma_bar_p_inf);
  a.M_inf = 2.0 * kappa * sigma_bar_p_inf;
  a.sigma_lmmse = a.alpha_inf * sigma_bar_p_inf;
  a.excess_rate = std::log2(kappa / std::sqrt(3.0));
  a.rate = 0.5 * std::log2(12.0 * a.sigma_lmmse * a.sigma_lmmse) + a.excess_rate;
  return a;
}

void RunningMeanSquare::push(double x) {
  ++count_;
  const auto k = static_cast<double>(count_);
  value_ = (k - 1.0) / k * value_ + x * x / k;
}

SlidingWindow::SlidingWindow(std::size_t capacity) : cap_(capacity), buf_(2 * capacity, 0.0) {
  if (capacity == 0) throw DomainError("SlidingWindow: capacity must be positive");
}

void SlidingWindow::push(double v) {
  head_ = (head_ + cap_ - 1) % cap_;
  buf_[head_] = v;
  buf_[head_ + cap_] = v;
  if (size_ < cap_) ++size_;
}

void SlidingWindow::clear() {
  head_ = 0;
  size_ = 0;
}

std::vector<double> CodecState::h() const {
  std::vector<double> out(h_unit.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * h_unit[i];
  return out;
}

void CodecState::set_h(std::span<const double> h) {
  h_unit.assign(h.begin(), h.end());
  for (auto& c : h_unit) c /= alpha;
}

namespace {

double resolution_at(const AdcConfig& config, int level) {
  return level == 0 ? config.alpha0 : config.alpha0 * std::pow(config.delta_alpha, -level);
}

}  // namespace

void apply_resolution_update(CodecState& state, bool increase, const AdcConfig& config) {
  if (state.C_alpha <= config.L_s || state.steady_flag) {
    throw StateError("apply_resolution_update: requires C_alpha > L_s and no steady-state latch");
  }
  state.level += increase ? 1 : -1;
  state.alpha = resolution_at(config, state.level);
  state.C_alpha = 0;
}

BlindCodec::BlindCodec(AdcConfig config)
    : config_((config.validate(), std::move(config))),
      range_(config_.R),
      h_scratch_(static_cast<std::size_t>(config_.p), 0.0),
      state_(static_cast<std::size_t>(config_.p), static_cast<std::size_t>(config_.L_s)) {
  state_.alpha = config_.alpha0;
  state_.set_h(config_.initial_filter());
  begin_epoch();
}

// Starts an initialization phase: p samples unfolded by center_shift alone
// at alpha0, with fresh variance, residual and threshold-clock statistics.
void BlindCodec::begin_epoch() {
  state_.level = 0;
  state_.alpha = config_.alpha0;
  state_.C_alpha = 0;
  state_.steady_flag = false;
  state_.n_epoch = 0;
  state_.t_thresh = state_.n + 1;
  state_.init_remaining = config_.p;
  state_.vbar_window.clear();
  state_.resid_window.clear();
  state_.run_var.reset();
  state_.longterm_resid.reset();
}

StepOutcome BlindCodec::decode(double y) {
  auto& s = state_;
  ++s.n;
  ++s.n_epoch;

  StepOutcome out;
  out.alpha = s.alpha;

  if (s.init_remaining > 0) {
    const double v = center_shift(y, range_.delta());
    const double vbar = (v + 0.5) / s.alpha;
    out.v_hat = v;
    out.x_hat = vbar;
    out.v_hat_p = kNaN;
    out.e_hat = kNaN;
    out.flags = kReinitializing;
    s.vbar_window.push(vbar);
    s.run_var.push(vbar);
    if (--s.init_remaining == 0) {
      s.mu = select_learning_rate(s.run_var.value(), config_.p, config_.eps_mu);
    }
    return out;
  }

  const double alpha_n = s.alpha;
  for (std::size_t i = 0; i < h_scratch_.size(); ++i) h_scratch_[i] = alpha_n * s.h_unit[i];
  const auto pred = blind_unfold_step(y, s.vbar_window.view(), h_scratch_, range_);
  const double vbar_hat = (pred.v_hat + 0.5) / alpha_n;
  out.v_hat = pred.v_hat;
  out.v_hat_p = pred.v_hat_p;
  out.e_hat = pred.v_hat - pred.v_hat_p;
  out.x_hat = vbar_hat;

  if (overload_detect(vbar_hat, s.run_var.value(), s.n_epoch, config_.N_s, config_.beta)) {
    out.flags |= kErrorDetected;
    // Re-open the modulo range; h = alpha * h_unit follows alpha back to alpha0.
    begin_epoch();
    return out;
  }

  const double e_hat = out.e_hat;
  s.resid_window.push(e_hat);
  const SigmaEstimate sigma_p = update_sigma_p(s.resid_window.view());
  s.longterm_resid.push(e_hat / alpha_n);

  // h += mu * window * e_hat, expressed on h_unit.
  lms_update(s.h_unit, s.mu / alpha_n, s.vbar_window.view(), e_hat);
  ++s.C_alpha;
  s.vbar_window.push(vbar_hat);
  s.run_var.push(vbar_hat);
  if (config_.adapt_mu) {
    s.mu = select_learning_rate(s.run_var.value(), config_.p, config_.eps_mu);
  }

  if (!config_.freeze_alpha && s.C_alpha > config_.L_s && !s.steady_flag) {
    const bool up = resolution_decision(sigma_p.sd, config_.kappa, range_.delta());
    const double M_n = s.M(range_);
    const bool at_limit =
        config_.steady_state_enabled &&
        steady_state_detect(std::sqrt(s.longterm_resid.value()), M_n, config_.kappa, s.n_epoch,
                            config_.N_s);
    apply_resolution_update(s, up, config_);
    out.flags |= up ? kResolutionUp : kResolutionDown;
    if (at_limit && up) s.steady_flag = true;
  }
  if (s.steady_flag) out.flags |= kSteadyState;
  return out;
}

CodecRun run_codec(std::span<const double> signal, const AdcConfig& config) {
  config.validate();
  if (signal.size() <= static_cast<std::size_t>(config.p) + 1) {
    throw DomainError("run_codec: signal must be longer than p + 1 samples");
  }
  BlindCodec codec(config);
  DitherSource dither(derive_seed(config.seed, 1), config.dither);
  const ModuloRange& range = codec.range();

  CodecRun run;
  run.trace.reserve(signal.size());
  std::vector<double> truth;
  truth.reserve(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double alpha = codec.alpha();
    const FoldedSample f = fold_quantize(signal[i], alpha, range, dither);
    const StepOutcome o = codec.decode(f.y);
    TraceRecord r;
    r.n = static_cast<std::int64_t>(i) + 1;
    r.x = signal[i];
    r.v = f.v;
    r.y = f.y;
    r.v_hat = o.v_hat;
    r.v_hat_p = o.v_hat_p;
    r.e_hat = o.e_hat;
    r.alpha = o.alpha;
    r.M = range.delta() / o.alpha;
    r.flag_error = o.has(kErrorDetected);
    r.flag_res_up = o.has(kResolutionUp);
    r.flag_res_down = o.has(kResolutionDown);
    r.flag_steady = o.has(kSteadyState);
    r.flag_reinit = o.has(kReinitializing);
    run.trace.push_back(r);
    truth.push_back(f.v);
  }
  run.summary = compute_metrics(run.trace, truth, config.kappa);
  return run;
}

}  // namespace modadc
