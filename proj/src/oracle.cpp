#include "modadc/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "modadc/errors.hpp"

namespace modadc {

LmmseSolution lmmse_filter(const Autocorrelation& autocorr, double alpha, int p) {
  if (p < 1) throw DomainError("lmmse_filter: p must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("lmmse_filter: alpha must be positive and finite");
  }
  const double noise = 1.0 / (12.0 * alpha * alpha);
  auto r_vbar = [&](int l) { return autocorr(l) + (l == 0 ? noise : 0.0); };

  Eigen::MatrixXd cov(p, p);
  Eigen::VectorXd cross(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) cov(i, j) = r_vbar(std::abs(i - j));
    cross(i) = r_vbar(i + 1);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("lmmse_filter: covariance is not positive definite");
  }
  // Target is v_n = alpha * vbar_n - 1/2, so the filter carries a factor alpha.
  const Eigen::VectorXd g = llt.solve(cross);
  if (!g.allFinite()) throw NumericError("lmmse_filter: singular normal equations");

  LmmseSolution sol;
  sol.alpha = alpha;
  sol.h_opt.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) sol.h_opt[static_cast<std::size_t>(i)] = alpha * g(i);
  const double vbar_err = r_vbar(0) - cross.dot(g);
  sol.sigma2_lmmse = std::max(0.0, alpha * alpha * vbar_err);
  return sol;
}

double oracle_prediction(std::span<const double> v_window, const LmmseSolution& sol) {
  if (v_window.size() != sol.h_opt.size()) {
    throw DomainError("oracle_prediction: window length must equal filter length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < v_window.size(); ++i) acc += sol.h_opt[i] * (v_window[i] + 0.5);
  return acc / sol.alpha - 0.5;
}

double oracle_unfold_step(double y, std::span<const double> v_window, const LmmseSolution& sol,
                          const ModuloRange& range) {
  return unfold_with_prediction(y, oracle_prediction(v_window, sol), range).v_hat;
}

double overload_bound(int R, double sigma2_lmmse) {
  if (!(sigma2_lmmse > 0.0)) throw DomainError("overload_bound: sigma2 must be positive");
  const double exponent = 2.0 * (static_cast<double>(R) - 0.5 * std::log2(12.0 * sigma2_lmmse));
  const double b = 2.0 * std::exp(-1.5 * std::exp2(exponent));
  return std::clamp(b, 0.0, 1.0);
}

double distortion_bound(double alpha, double p_overload) {
  if (!(alpha > 0.0)) throw DomainError("distortion_bound: alpha must be positive");
  if (!(p_overload >= 0.0 && p_overload < 1.0)) {
    throw DomainError("distortion_bound: overload probability must lie in [0, 1)");
  }
  return 1.0 / (12.0 * alpha * alpha * (1.0 - p_overload));
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

InformedRunStats simulate_informed_decoder(const MaGaussianSpec& signal, const LmmseSolution& sol,
                                           const ModuloRange& range, std::uint64_t dither_seed,
                                           std::uint64_t n_samples) {
  const std::size_t p = sol.h_opt.size();
  MaGaussianGenerator gen(signal);
  DitherSource dither(dither_seed);

  // Double-length buffer keeps [v_{n-1}, ..., v_{n-p}] contiguous.
  std::vector<double> buf(2 * p, 0.0);
  std::size_t head = 0;
  auto push = [&](double v) {
    head = (head + p - 1) % p;
    buf[head] = v;
    buf[head + p] = v;
  };
  for (std::size_t i = 0; i < p; ++i) {
    push(fold_quantize(gen.next(), sol.alpha, range, dither).v);
  }

  InformedRunStats st;
  double pred_sq = 0.0, v_sq = 0.0, dist_sq = 0.0;
  std::uint64_t n_clean = 0;
  for (std::uint64_t n = 0; n < n_samples; ++n) {
    const double x = gen.next();
    const auto f = fold_quantize(x, sol.alpha, range, dither);
    const std::span<const double> window(buf.data() + head, p);
    const double pred = oracle_prediction(window, sol);
    const double v_hat = unfold_with_prediction(f.y, pred, range).v_hat;
    const double e = f.v - pred;
    pred_sq += e * e;
    const double dv = v_hat - f.v;
    v_sq += dv * dv;
    if (std::fabs(e) >= range.half()) {
      ++st.n_overload;
    } else {
      const double dx = x - (v_hat + 0.5) / sol.alpha;
      dist_sq += dx * dx;
      ++n_clean;
    }
    push(f.v);
  }
  st.n = n_samples;
  const double nn = static_cast<double>(n_samples);
  st.overload_rate = static_cast<double>(st.n_overload) / nn;
  st.prediction_mse = pred_sq / nn;
  st.mse_v_unconditional = v_sq / nn;
  st.distortion_conditional = n_clean > 0 ? dist_sq / static_cast<double>(n_clean) : 0.0;
  return st;
}

}  // namespace modadc
