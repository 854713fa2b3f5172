#pragma once

// Experiment reproduction, Monte-Carlo runs, metrics and output files.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modadc/blind.hpp"
#include "modadc/config_io.hpp"

namespace modadc {

/// Gaussian MA input (L_x = 15) with the default system parameters.
ExperimentConfig experiment1_config(std::optional<double> kappa, std::uint64_t seed,
                                    std::size_t n_samples = 10000);

/// Bandlimited Rademacher input with three narrowband interferers, 10^5
/// samples, steady-state detector disabled.
ExperimentConfig experiment2_config(std::uint64_t seed);

struct SingleRun {
  std::vector<double> signal;
  CodecRun run;
};

/// Generates the configured signal and runs the codec once (no trial seeding).
SingleRun run_single(const ExperimentConfig& cfg);

/// Writes trace.csv, truth.csv, summary.json and config.echo into `dir`.
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const CodecRun& run);

RunSummary run_experiment1(std::optional<double> kappa, std::uint64_t seed, std::size_t n_samples,
                           const std::filesystem::path& out_dir);
RunSummary run_experiment2(std::uint64_t seed, const std::filesystem::path& out_dir);

/// Config for trial `t` of a Monte-Carlo run. With a single trial the
/// config is returned unchanged; otherwise all seeds derive from base_seed.
ExperimentConfig trial_config(const ExperimentConfig& cfg, int t);

struct FieldStat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct MonteCarloResult {
  std::vector<RunSummary> trials;
  std::map<std::string, FieldStat> aggregate;
};

/// Numeric summary fields by name, used for aggregation and sweeps.
std::map<std::string, double> summary_fields(const RunSummary& s);

/// Runs cfg.trials independent trials in parallel worker threads.
MonteCarloResult run_generic(const ExperimentConfig& cfg);

struct SweepPoint {
  double value;
  MonteCarloResult result;
};

/// Re-runs `cfg` with one parameter (kappa, delta_alpha or R) set to each value.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg, const std::string& param,
                                  const std::vector<double>& values);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> mismatches;
};

/// Recomputes the summary from trace.csv + truth.csv + config.echo and
/// compares it with summary.json field by field.
VerifyReport verify_outputs(const std::filesystem::path& dir);

/// Indices n at which the detector flagged an error event.
std::vector<std::int64_t> error_event_indices(std::span<const TraceRecord> trace);

struct WrongBurst {
  std::int64_t first_n;
  std::int64_t last_n;
  std::int64_t n_wrong;
  std::optional<std::int64_t> first_detection_n;  // first flag_error in [first_n, last_n + gap]
};

/// Groups samples with |v_hat - v| >= tol into bursts; a burst ends once
/// `gap` consecutive samples are recovered exactly.
std::vector<WrongBurst> wrong_bursts(std::span<const TraceRecord> trace, std::int64_t gap);

}  // namespace modadc
