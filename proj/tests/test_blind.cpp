#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "modadc/blind.hpp"
#include "modadc/errors.hpp"
#include "modadc/harness.hpp"
#include "modadc/signals.hpp"
#include "oracles.hpp"

using namespace modadc;

namespace {

AdcConfig small_config(int p = 2) {
  AdcConfig c;
  c.p = p;
  c.alpha0 = 100.0;
  c.delta_alpha = 0.9;
  c.L_s = 40;
  return c;
}

bool is_init(const TraceRecord& r) { return std::isnan(r.v_hat_p); }

}  // namespace

TEST_CASE("blind_unfold_step examples") {
  const ModuloRange range(4);
  const std::vector<double> h{1.0};
  {
    const std::vector<double> w{19.5};  // prediction 19.0
    const auto r = blind_unfold_step(mod_reduce(20.3, 16.0), w, h, range);
    CHECK(r.v_hat_p == 19.0);
    CHECK(r.v_hat == doctest::Approx(20.3).epsilon(1e-14));
  }
  {
    const std::vector<double> w{11.5};  // prediction 11.0, error 9.3 > 8
    const auto r = blind_unfold_step(mod_reduce(20.3, 16.0), w, h, range);
    CHECK(r.v_hat - r.v_hat_p == doctest::Approx(-6.7).epsilon(1e-12));
    CHECK(r.v_hat == doctest::Approx(4.3).epsilon(1e-12));
  }
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const std::vector<double> any{3.0, -7.0, 1e3};
  CHECK(blind_unfold_step(5.0, any, zero, range).v_hat_p == -0.5);
  CHECK_THROWS_AS(blind_unfold_step(5.0, any, h, range), DomainError);
}

TEST_CASE("lms_update examples") {
  std::vector<double> h{0.0, 0.0};
  lms_update(h, 0.1, std::vector<double>{1.0, 2.0}, 0.5);
  CHECK(h[0] == doctest::Approx(0.05));
  CHECK(h[1] == doctest::Approx(0.10));
  const auto before = h;
  lms_update(h, 0.1, std::vector<double>{1.0, 2.0}, 0.0);
  CHECK(h == before);
  lms_update(h, 0.1, std::vector<double>{0.0, 0.0}, 3.0);
  CHECK(h == before);
}

TEST_CASE("select_learning_rate examples") {
  CHECK(select_learning_rate(1.0, 40, 0.01) == doctest::Approx(2.5e-4));
  CHECK(select_learning_rate(2.0, 40, 0.01) == doctest::Approx(1.25e-4));
  CHECK_THROWS_AS(select_learning_rate(0.0, 40, 0.01), StateError);
}

TEST_CASE("update_sigma_p examples") {
  const std::vector<double> c(40, -2.5);
  const auto a = update_sigma_p(c);
  CHECK(a.var == doctest::Approx(6.25));
  CHECK(a.sd == doctest::Approx(2.5));
  const auto b = update_sigma_p(std::vector<double>{3.0, -4.0});
  CHECK(b.var == 12.5);
  CHECK(b.sd == doctest::Approx(std::sqrt(12.5)));
  CHECK_THROWS_AS(update_sigma_p(std::vector<double>{}), StateError);
}

TEST_CASE("update_sigma_p on Gaussian residual windows") {
  Rng rng(3);
  const double sigma2 = 4.0;
  const int windows = 10000, L = 40;
  int inside = 0;
  std::vector<double> w(L);
  for (int k = 0; k < windows; ++k) {
    for (auto& x : w) x = 2.0 * rng.normal();
    if (std::fabs(update_sigma_p(w).var - sigma2) <= 3.0 * sigma2 * std::sqrt(2.0 / L)) ++inside;
  }
  CHECK(static_cast<double>(inside) / windows >= 0.98);
}

TEST_CASE("resolution_decision examples") {
  CHECK(resolution_decision(100.0, 4.5, 1024.0));
  CHECK_FALSE(resolution_decision(120.0, 4.5, 1024.0));
  // An exact tie: 4 * 128 == 512.
  CHECK_FALSE(resolution_decision(128.0, 4.0, 1024.0));
}

TEST_CASE("apply_resolution_update examples and preconditions") {
  const auto cfg = small_config();
  CodecState s(2, 40);
  s.alpha = 100.0;
  s.set_h(std::vector<double>{1.0, -2.0});
  const auto h0 = s.h();

  s.C_alpha = 41;
  apply_resolution_update(s, true, cfg);
  CHECK(s.alpha == doctest::Approx(100.0 / 0.9).epsilon(1e-15));
  CHECK(s.C_alpha == 0);
  CHECK(s.h()[0] == doctest::Approx(h0[0] / 0.9).epsilon(1e-15));
  CHECK(s.h()[1] == doctest::Approx(h0[1] / 0.9).epsilon(1e-15));

  s.C_alpha = 41;
  apply_resolution_update(s, false, cfg);
  CHECK(s.alpha == 100.0);
  CHECK(s.h() == h0);

  s.C_alpha = 41;
  apply_resolution_update(s, false, cfg);
  CHECK(s.alpha == doctest::Approx(90.0).epsilon(1e-15));

  s.C_alpha = 40;
  CHECK_THROWS_AS(apply_resolution_update(s, true, cfg), StateError);
  s.C_alpha = 41;
  s.steady_flag = true;
  CHECK_THROWS_AS(apply_resolution_update(s, true, cfg), StateError);
}

TEST_CASE("up and down steps are exact inverses") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    auto cfg = small_config(5);
    cfg.alpha0 = 1.0 + 500.0 * rng.uniform();
    cfg.delta_alpha = 0.5 + 0.49 * rng.uniform();
    CodecState s(5, 40);
    s.alpha = cfg.alpha0;
    std::vector<double> h(5);
    for (auto& c : h) c = rng.normal() * 50.0;
    s.set_h(h);
    const auto alpha0 = s.alpha;
    const auto h_start = s.h();
    // Random walk of ups and downs that ends back at the start level.
    std::vector<int> steps;
    for (int i = 0; i < 30; ++i) steps.push_back(rng.uniform() < 0.5 ? 1 : -1);
    const int net = std::accumulate(steps.begin(), steps.end(), 0);
    for (int i = 0; i < std::abs(net); ++i) steps.push_back(net > 0 ? -1 : 1);
    std::vector<double> seen;
    int level = 0;
    for (int st : steps) {
      s.C_alpha = 41;
      apply_resolution_update(s, st > 0, cfg);
      level += st;
      if (level == 1 && st > 0) seen.push_back(s.alpha);
    }
    CHECK(s.alpha == alpha0);
    CHECK(s.h() == h_start);
    for (double a : seen) CHECK(a == seen.front());
  }
}

TEST_CASE("scaling alpha and h together rescales the prediction") {
  Rng rng(4);
  const ModuloRange range(10);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> h(6), w(6);
    for (auto& c : h) c = rng.normal() * 30.0;
    for (auto& c : w) c = rng.normal();
    const double scale = rng.uniform() < 0.5 ? 1.0 / 0.9 : 0.9;
    const double before = blind_unfold_step(0.0, w, h, range).v_hat_p;
    for (auto& c : h) c *= scale;
    const double after = blind_unfold_step(0.0, w, h, range).v_hat_p;
    CHECK(after == doctest::Approx((before + 0.5) * scale - 0.5).epsilon(1e-12));
  }
}

TEST_CASE("running mean square examples and batch agreement") {
  RunningMeanSquare r;
  r.push(1.0);
  CHECK(r.value() == 1.0);
  r.push(3.0);
  CHECK(r.value() == 5.0);
  r.reset();
  CHECK(r.count() == 0);

  Rng rng(19);
  for (double scale : {1e-3, 1.0, 1e4}) {
    RunningMeanSquare acc;
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) {
      const double x = scale * rng.normal() * (1.0 + 10.0 * rng.uniform());
      xs.push_back(x);
      acc.push(x);
      if (i % 9973 == 0 || i == 99999) {
        const double batch = oracles::batch_mean_square(xs);
        CHECK(std::fabs(acc.value() - batch) <= 1e-12 * batch);
      }
    }
  }
}

TEST_CASE("overload_detect examples") {
  CHECK(std::sqrt(2.0 * std::log(500.0)) == doctest::Approx(3.525).epsilon(1e-3));
  CHECK(overload_detect(10.0, 1.0, 500, 500, 5.0));
  CHECK_FALSE(overload_detect(3.0, 1.0, 500, 500, 5.0));
  CHECK(overload_detect(6.0, 1.0, 100, 500, 5.0));
  CHECK_FALSE(overload_detect(4.9, 1.0, 100, 500, 5.0));
  CHECK(overload_detect(-6.0, 1.0, 100, 500, 5.0));
  CHECK_THROWS_AS(overload_detect(1.0, 0.0, 600, 500, 5.0), StateError);
  CHECK_THROWS_AS(overload_detect(1.0, 1.0, 0, 500, 5.0), StateError);
}

TEST_CASE("steady_state_detect examples") {
  CHECK(steady_state_detect(1.2, 10.0, 4.5, 600, 500));
  CHECK_FALSE(steady_state_detect(1.0, 10.0, 4.5, 600, 500));
  // 9 / (2 * 4.5) == 1 exactly: a tie is not a detection.
  CHECK_FALSE(steady_state_detect(1.0, 9.0, 4.5, 600, 500));
  CHECK_FALSE(steady_state_detect(5.0, 10.0, 4.5, 499, 500));
}

TEST_CASE("predict_asymptotics examples") {
  CHECK(std::fabs(predict_asymptotics(std::sqrt(3.0), 10, 1.0).excess_rate) < 1e-15);
  const auto a = predict_asymptotics(4.5, 10, 1.0);
  CHECK(a.alpha_inf == doctest::Approx(512.0 / 4.5));
  CHECK(a.M_inf == doctest::Approx(9.0));
  for (int R : {4, 10, 16}) {
    CHECK(predict_asymptotics(3.7, R, 0.31).rate == doctest::Approx(static_cast<double>(R)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(predict_asymptotics(0.0, 10, 1.0), DomainError);
}

TEST_CASE("config validation names the field") {
  AdcConfig c;
  c.delta_alpha = 1.0;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("delta_alpha") != std::string::npos);
  }
  AdcConfig h;
  h.h0 = {1.0, 2.0};
  CHECK_THROWS_AS(h.validate(), ConfigError);
  CHECK_THROWS_AS(run_codec(std::vector<double>(41, 0.0), AdcConfig{}), DomainError);
}

TEST_CASE("sliding window keeps the newest sample first") {
  SlidingWindow w(3);
  for (double v : {1.0, 2.0, 3.0, 4.0}) w.push(v);
  const auto view = w.view();
  REQUIRE(view.size() == 3);
  CHECK(view[0] == 4.0);
  CHECK(view[1] == 3.0);
  CHECK(view[2] == 2.0);
}

TEST_CASE("decoder outputs are self-consistent") {
  const auto cfg = experiment1_config(3.5, 11, 6000);
  const auto sig = generate_signal(cfg.signal, cfg.n_samples);
  BlindCodec codec(cfg.adc);
  DitherSource d(derive_seed(cfg.adc.seed, 1));
  int errors = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double alpha = codec.alpha();
    const auto f = fold_quantize(sig[i], alpha, codec.range(), d);
    const auto o = codec.decode(f.y);
    CHECK(o.alpha == alpha);
    CHECK(std::fabs(o.x_hat * o.alpha - o.v_hat - 0.5) <= 1e-9 * std::max(1.0, std::fabs(o.v_hat)));
    if (i < static_cast<std::size_t>(cfg.adc.p)) CHECK(o.has(kReinitializing));
    if (o.has(kErrorDetected)) {
      ++errors;
      const auto& s = codec.state();
      CHECK(s.alpha == cfg.adc.alpha0);
      CHECK(s.level == 0);
      CHECK(s.n_epoch == 0);
      CHECK(s.C_alpha == 0);
      CHECK(s.run_var.count() == 0);
      CHECK(s.longterm_resid.count() == 0);
      CHECK_FALSE(s.steady_flag);
      CHECK(s.init_remaining == cfg.adc.p);
      // h is rescaled by alpha0 / alpha_n along with the reset.
      const auto h = s.h();
      for (std::size_t k = 0; k < h.size(); ++k) {
        CHECK(h[k] == doctest::Approx(cfg.adc.alpha0 * s.h_unit[k]).epsilon(1e-15));
      }
    }
    if (codec.state().init_remaining == 0 && o.has(kReinitializing)) {
      // Learning rate is recomputed from the fresh initialization statistics.
      CHECK(codec.state().mu ==
            select_learning_rate(codec.state().run_var.value(), cfg.adc.p, cfg.adc.eps_mu));
    }
  }
  CHECK(errors >= 0);
}

TEST_CASE("unfolding is exact whenever the true prediction error is inside the range") {
  for (double kappa : {3.5, 4.5}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto run = run_single(experiment1_config(kappa, seed, 10000)).run;
      const double half = std::ldexp(1.0, 10 - 1);
      for (const auto& r : run.trace) {
        if (is_init(r)) {
          CHECK(std::fabs(r.v_hat - r.v) < 1e-9);  // |v| < delta / 2 at alpha0 for these inputs
          continue;
        }
        if (std::fabs(r.v - r.v_hat_p) < half) CHECK(std::fabs(r.v_hat - r.v) < 1e-9);
      }
    }
  }
}

TEST_CASE("error detections follow the epoch-local threshold rule") {
  // Recomputes every detection decision from the trace with its own bookkeeping.
  for (std::uint64_t seed : {5, 7, 10, 12, 16, 18}) {
    const auto cfg = experiment1_config(3.5, seed, 10000);
    const auto run = run_single(cfg).run;
    double ms = 0.0;
    std::int64_t k = 0, n_epoch = 0;
    int detections = 0;
    for (const auto& r : run.trace) {
      ++n_epoch;
      const double vbar = (r.v_hat + 0.5) / r.alpha;
      if (!is_init(r)) {
        const double thr = n_epoch >= cfg.adc.N_s
                               ? std::sqrt(2.0 * ms * std::log(static_cast<double>(n_epoch)))
                               : cfg.adc.beta * std::sqrt(ms);
        if (std::fabs(std::fabs(vbar) - thr) > 1e-9 * thr) CHECK(r.flag_error == (std::fabs(vbar) > thr));
        if (r.flag_error) {
          ++detections;
          ms = 0.0, k = 0, n_epoch = 0;
          continue;
        }
      }
      ++k;
      ms += (vbar * vbar - ms) / static_cast<double>(k);
    }
    CHECK(detections == run.summary.n_error_events);
  }
}

TEST_CASE("re-initialization follows every detection") {
  const auto cfg = experiment1_config(3.5, 16, 10000);
  const auto run = run_single(cfg).run;
  const auto& tr = run.trace;
  REQUIRE(run.summary.n_error_events > 0);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (!tr[i].flag_error) continue;
    for (std::size_t j = i + 1; j <= i + static_cast<std::size_t>(cfg.adc.p) && j < tr.size(); ++j) {
      CHECK(tr[j].flag_reinit);
      CHECK(tr[j].alpha == cfg.adc.alpha0);
    }
    if (i + cfg.adc.p + 1 < tr.size()) CHECK_FALSE(tr[i + cfg.adc.p + 1].flag_reinit);
  }
}

TEST_CASE("defense liveness: wrong output after a true overload is short-lived") {
  // Every true overload must be followed within p+1 samples by a detection or
  // by a return to exact output, and no wrong burst may exceed 3(p+1) samples.
  const int p = 40;
  const std::int64_t bound = 3 * (p + 1);
  const double half = 512.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto run = run_single(experiment1_config(3.5, seed, 10000)).run;
    const auto& tr = run.trace;
    auto wrong = [&](std::size_t i) { return !(std::fabs(tr[i].v_hat - tr[i].v) < kExactRecoveryTol); };
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const bool overload = !is_init(tr[i]) && std::fabs(tr[i].v - tr[i].v_hat_p) >= half;
      if (!overload || (i > 0 && wrong(i - 1))) continue;  // first overload of an episode
      // Episode ends at the first run of p+1 exact samples.
      std::size_t last_wrong = i, clean = 0, j = i;
      bool handled = false;
      for (; j < tr.size() && clean <= static_cast<std::size_t>(p); ++j) {
        if (wrong(j)) last_wrong = j, clean = 0; else ++clean;
        if (j <= i + p + 1 && (tr[j].flag_error || !wrong(j))) handled = true;
      }
      INFO("seed " << seed << " overload at n=" << tr[i].n << " wrong until n=" << tr[last_wrong].n);
      CHECK(handled);
      CHECK(static_cast<std::int64_t>(last_wrong - i + 1) <= bound);
    }
  }
}

TEST_CASE("standardized samples keep the input autocorrelation off lag zero") {
  // Frozen alpha = 1 makes the quantization term 1/12 visible at lag 0.
  AdcConfig c;
  c.alpha0 = 1.0;
  c.freeze_alpha = true;
  c.seed = 8;
  const auto x = gen_ma_gaussian({15, 21}, 100000);
  const auto run = run_codec(x, c);
  CHECK(run.summary.n_wrong == 0);
  std::vector<double> vbar;
  for (const auto& r : run.trace) vbar.push_back((r.v_hat + 0.5) / r.alpha);
  const auto R = sample_autocorr(vbar, 40);
  for (int l = 1; l <= 40; ++l) CHECK(std::fabs(R[l] - theoretical_autocorr_ma(15, l)) < 0.03);
  CHECK(std::fabs(R[0] - 1.0 - 1.0 / 12.0) < 0.03);
}

TEST_CASE("white input settles no finer than the unpredictable equilibrium") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = experiment1_config(std::nullopt, seed, 10000);
    cfg.signal.ma.L_x = 1;
    const auto run = run_single(cfg).run;
    REQUIRE(run.summary.steady_state_index.has_value());
    CHECK(run.summary.tail_mean_M >= 0.75 * 2.0 * cfg.adc.kappa * run.summary.sigma_bar_p);
  }
}

TEST_CASE("machine-precision recovery on an overload-free run") {
  const auto run = run_single(experiment1_config(4.5, 1, 10000)).run;
  CHECK(run.summary.n_wrong == 0);
  CHECK(run.summary.mean_sq_v_error < 1e-20);
  CHECK(run.trace.front().M == doctest::Approx(10.24));
  REQUIRE(run.summary.steady_state_index.has_value());
  CHECK(run.summary.tail_mean_M < 10.24);
}
