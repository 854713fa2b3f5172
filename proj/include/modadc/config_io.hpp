#pragma once

// Flat key = value configuration files and CSV/JSON emission.

#include <filesystem>
#include <string>
#include <vector>

#include "modadc/blind.hpp"
#include "modadc/signals.hpp"
#include "modadc/trace.hpp"

namespace modadc {

struct ExperimentConfig {
  AdcConfig adc;
  SignalSpec signal;
  std::size_t n_samples = 10000;
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::string out_dir;

  /// Field-level checks on top of AdcConfig::validate().
  void validate() const;
};

/// Serializes every field; doubles use 17 significant digits so parsing the
/// result reproduces the config bit for bit.
std::string format_config(const ExperimentConfig& cfg);

/// Parses config text. Unknown keys, duplicates and malformed values raise
/// ConfigError with the offending line number. `source` names the input in
/// diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

inline constexpr const char* kTraceHeader =
    "n,x,v,y,v_hat,v_hat_p,e_hat,alpha,M,flag_error,flag_res_up,flag_res_down,flag_steady,"
    "flag_reinit";
inline constexpr const char* kTruthHeader = "n,x,v";

void emit_trace(std::span<const TraceRecord> trace, const std::filesystem::path& path);
std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

/// Ground truth x_n and v_n, kept apart from the decoder's trace.
void emit_truth(std::span<const TraceRecord> trace, const std::filesystem::path& path);
std::vector<double> load_truth_v(const std::filesystem::path& path);

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);

/// Shortest round-trip text for a double ("nan" and "inf" included).
std::string format_double(double v);

}  // namespace modadc
