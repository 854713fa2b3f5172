#include "modadc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "modadc/errors.hpp"
#include "modadc/rng.hpp"

namespace modadc {

namespace fs = std::filesystem;

double final_epoch_sigma_bar(std::span<const TraceRecord> trace) {
  std::size_t start = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].flag_error) start = i + 1;
  }
  // Same recursion as the decoder so the value is reproduced exactly.
  RunningMeanSquare acc;
  for (std::size_t i = start; i < trace.size(); ++i) {
    const auto& r = trace[i];
    if (r.flag_reinit || r.flag_error) continue;
    acc.push(r.e_hat / r.alpha);
  }
  return std::sqrt(acc.value());
}

RunSummary compute_metrics(std::span<const TraceRecord> trace, std::span<const double> truth_v,
                           double kappa) {
  if (trace.size() != truth_v.size()) {
    throw DomainError("compute_metrics: trace and ground truth lengths differ");
  }
  RunSummary s;
  s.n_samples = static_cast<std::int64_t>(trace.size());
  if (trace.empty()) return s;

  double sq = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& r = trace[i];
    const double d = r.v_hat - truth_v[i];
    sq += d * d;
    if (!(std::fabs(d) < kExactRecoveryTol)) ++s.n_wrong;
    if (r.flag_error) ++s.n_error_events;
    if (r.flag_res_up) ++s.n_resolution_ups;
    if (r.flag_res_down) ++s.n_resolution_downs;
  }
  const auto n = static_cast<double>(trace.size());
  s.empirical_error_prob = static_cast<double>(s.n_wrong) / n;
  s.mean_sq_v_error = sq / n;

  const std::size_t tail_start = trace.size() - trace.size() / 5;
  double m = 0.0;
  for (std::size_t i = tail_start; i < trace.size(); ++i) m += trace[i].M;
  s.tail_mean_M = m / static_cast<double>(trace.size() - tail_start);

  if (trace.back().flag_steady) {
    std::size_t i = trace.size() - 1;
    while (i > 0 && trace[i - 1].flag_steady) --i;
    s.steady_state_index = trace[i].n;
  }
  s.sigma_bar_p = final_epoch_sigma_bar(trace);
  s.predicted_M_inf = 2.0 * kappa * s.sigma_bar_p;
  return s;
}

ExperimentConfig experiment1_config(std::optional<double> kappa, std::uint64_t seed,
                                    std::size_t n_samples) {
  ExperimentConfig cfg;
  if (kappa) cfg.adc.kappa = *kappa;
  cfg.adc.seed = derive_seed(seed, 0);
  cfg.signal.kind = SignalKind::MaGaussian;
  cfg.signal.ma.L_x = 15;
  cfg.signal.ma.seed = derive_seed(seed, 1);
  cfg.n_samples = n_samples;
  cfg.base_seed = seed;
  return cfg;
}

ExperimentConfig experiment2_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.adc.seed = derive_seed(seed, 0);
  cfg.adc.steady_state_enabled = false;
  cfg.signal.kind = SignalKind::BandlimitedRademacher;
  cfg.signal.bandlimited.seed = derive_seed(seed, 1);
  cfg.signal.ma.seed = cfg.signal.bandlimited.seed;
  cfg.signal.interferers = default_interferers(derive_seed(seed, 2));
  cfg.n_samples = 100000;
  cfg.base_seed = seed;
  return cfg;
}

SingleRun run_single(const ExperimentConfig& cfg) {
  cfg.validate();
  SingleRun out;
  out.signal = generate_signal(cfg.signal, cfg.n_samples);
  out.run = run_codec(out.signal, cfg.adc);
  return out;
}

void write_outputs(const fs::path& dir, const ExperimentConfig& cfg, const CodecRun& run) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  emit_trace(run.trace, dir / "trace.csv");
  emit_truth(run.trace, dir / "truth.csv");
  save_config(cfg, dir / "config.echo");
  std::ofstream out(dir / "summary.json", std::ios::binary);
  if (!out) throw IoError("cannot write summary.json");
  out << summary_to_json(run.summary);
}

RunSummary run_experiment1(std::optional<double> kappa, std::uint64_t seed, std::size_t n_samples,
                           const fs::path& out_dir) {
  auto cfg = experiment1_config(kappa, seed, n_samples);
  cfg.out_dir = out_dir.string();
  const auto single = run_single(cfg);
  if (!out_dir.empty()) write_outputs(out_dir, cfg, single.run);
  return single.run.summary;
}

RunSummary run_experiment2(std::uint64_t seed, const fs::path& out_dir) {
  auto cfg = experiment2_config(seed);
  cfg.out_dir = out_dir.string();
  const auto single = run_single(cfg);
  if (!out_dir.empty()) write_outputs(out_dir, cfg, single.run);
  return single.run.summary;
}

ExperimentConfig trial_config(const ExperimentConfig& cfg, int t) {
  if (cfg.trials <= 1) return cfg;
  ExperimentConfig c = cfg;
  const auto base = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(t));
  c.trials = 1;
  c.adc.seed = derive_seed(base, 0);
  c.signal.ma.seed = derive_seed(base, 1);
  c.signal.bandlimited.seed = c.signal.ma.seed;
  for (std::size_t i = 0; i < c.signal.interferers.size(); ++i) {
    c.signal.interferers[i].phase_seed = derive_seed(base, 100 + i);
  }
  return c;
}

std::map<std::string, double> summary_fields(const RunSummary& s) {
  return {
      {"empirical_error_prob", s.empirical_error_prob},
      {"mean_sq_v_error", s.mean_sq_v_error},
      {"tail_mean_M", s.tail_mean_M},
      {"n_error_events", static_cast<double>(s.n_error_events)},
      {"n_resolution_ups", static_cast<double>(s.n_resolution_ups)},
      {"n_resolution_downs", static_cast<double>(s.n_resolution_downs)},
      {"sigma_bar_p", s.sigma_bar_p},
      {"predicted_M_inf", s.predicted_M_inf},
      {"steady_state_reached", s.steady_state_index ? 1.0 : 0.0},
  };
}

MonteCarloResult run_generic(const ExperimentConfig& cfg) {
  cfg.validate();
  const int T = cfg.trials;
  MonteCarloResult res;
  res.trials.resize(static_cast<std::size_t>(T));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (int t = next++; t < T; t = next++) {
      try {
        res.trials[static_cast<std::size_t>(t)] = run_single(trial_config(cfg, t)).run.summary;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_workers = std::min<unsigned>(hw, static_cast<unsigned>(T));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::map<std::string, std::vector<double>> cols;
  for (const auto& s : res.trials) {
    for (const auto& [k, v] : summary_fields(s)) cols[k].push_back(v);
  }
  for (const auto& [k, vals] : cols) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var = vals.size() > 1 ? var / static_cast<double>(vals.size() - 1) : 0.0;
    res.aggregate[k] = {mean, std::sqrt(var)};
  }
  return res;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, const std::string& param,
                                  const std::vector<double>& values) {
  std::vector<SweepPoint> out;
  for (double v : values) {
    ExperimentConfig c = cfg;
    if (param == "kappa") {
      c.adc.kappa = v;
    } else if (param == "delta_alpha") {
      c.adc.delta_alpha = v;
    } else if (param == "R") {
      if (v != std::floor(v)) throw ConfigError("sweep: R values must be integers");
      c.adc.R = static_cast<int>(v);
    } else {
      throw ConfigError("sweep: unknown parameter '" + param + "' (kappa, delta_alpha or R)");
    }
    out.push_back({v, run_generic(c)});
  }
  return out;
}

VerifyReport verify_outputs(const fs::path& dir) {
  const auto cfg = load_config(dir / "config.echo");
  const auto trace = load_trace(dir / "trace.csv");
  const auto truth = load_truth_v(dir / "truth.csv");
  std::ifstream in(dir / "summary.json");
  if (!in) throw IoError("cannot open summary.json in '" + dir.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const RunSummary stored = summary_from_json(ss.str());
  const RunSummary fresh = compute_metrics(trace, truth, cfg.adc.kappa);

  VerifyReport rep;
  auto check = [&](const std::string& name, double a, double b) {
    if (!(a == b || (std::isnan(a) && std::isnan(b)))) {
      rep.ok = false;
      rep.mismatches.push_back(name + ": summary " + format_double(a) + " vs trace " + format_double(b));
    }
  };
  check("n_samples", static_cast<double>(stored.n_samples), static_cast<double>(fresh.n_samples));
  check("n_wrong", static_cast<double>(stored.n_wrong), static_cast<double>(fresh.n_wrong));
  for (const auto& [k, v] : summary_fields(stored)) check(k, v, summary_fields(fresh).at(k));
  if (stored.steady_state_index != fresh.steady_state_index) {
    rep.ok = false;
    rep.mismatches.push_back("steady_state_index differs");
  }
  if (trace.size() != cfg.n_samples) {
    rep.ok = false;
    rep.mismatches.push_back("trace length differs from n_samples");
  }
  return rep;
}

std::vector<std::int64_t> error_event_indices(std::span<const TraceRecord> trace) {
  std::vector<std::int64_t> out;
  for (const auto& r : trace) {
    if (r.flag_error) out.push_back(r.n);
  }
  return out;
}

std::vector<WrongBurst> wrong_bursts(std::span<const TraceRecord> trace, std::int64_t gap) {
  std::vector<WrongBurst> bursts;
  std::optional<WrongBurst> cur;
  for (const auto& r : trace) {
    const bool wrong = !(std::fabs(r.v_hat - r.v) < kExactRecoveryTol);
    if (cur && r.n - cur->last_n > gap) {
      bursts.push_back(*cur);
      cur.reset();
    }
    if (wrong) {
      if (!cur) cur = WrongBurst{r.n, r.n, 0, std::nullopt};
      cur->last_n = r.n;
      ++cur->n_wrong;
    }
    if (cur && r.flag_error && !cur->first_detection_n) cur->first_detection_n = r.n;
  }
  if (cur) bursts.push_back(*cur);
  return bursts;
}

}  // namespace modadc
