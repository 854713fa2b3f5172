// modadc: command line front-end for the blind modulo ADC simulator.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "modadc/errors.hpp"
#include "modadc/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericError = 3, kVerifyFailure = 4 };

void print_summary(const modadc::RunSummary& s) {
  std::cout << modadc::summary_to_json(s);
}

void print_aggregate(const modadc::MonteCarloResult& r) {
  std::printf("%-24s %-24s %-24s\n", "field", "mean", "std");
  for (const auto& [k, st] : r.aggregate) {
    std::printf("%-24s %-24s %-24s\n", k.c_str(), modadc::format_double(st.mean).c_str(),
                modadc::format_double(st.stddev).c_str());
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw modadc::ConfigError("--values: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw modadc::ConfigError("--values: empty list");
  return out;
}

modadc::ExperimentConfig load_cli_config(const std::string& path) {
  try {
    return modadc::load_config(path);
  } catch (const modadc::IoError& e) {
    throw modadc::ConfigError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind modulo ADC simulator"};
  app.require_subcommand(1);

  auto* exp1 = app.add_subcommand("exp1", "Gaussian MA input with the default parameters");
  std::optional<double> kappa;
  std::uint64_t seed1 = 1;
  std::size_t n1 = 10000;
  std::string out1 = "out/exp1";
  exp1->add_option("--kappa", kappa, "Confidence parameter (default 4.5)");
  exp1->add_option("--seed", seed1, "Random seed");
  exp1->add_option("--n", n1, "Number of samples");
  exp1->add_option("--out", out1, "Output directory");

  auto* exp2 = app.add_subcommand("exp2", "Bandlimited input with three narrowband interferers");
  std::uint64_t seed2 = 1;
  std::string out2 = "out/exp2";
  exp2->add_option("--seed", seed2, "Random seed");
  exp2->add_option("--out", out2, "Output directory");

  auto* run = app.add_subcommand("run", "Run a configuration file (optionally Monte-Carlo)");
  std::string run_cfg;
  std::optional<int> trials;
  run->add_option("--config", run_cfg, "Configuration file")->required();
  run->add_option("--trials", trials, "Number of independent trials");

  auto* verify = app.add_subcommand("verify", "Check summary.json against trace and truth files");
  std::string verify_dir;
  verify->add_option("--out", verify_dir, "Output directory of a previous run")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter over a list of values");
  std::string sweep_param, sweep_values, sweep_cfg;
  sweep->add_option("--param", sweep_param, "kappa, delta_alpha or R")
      ->required()
      ->check(CLI::IsMember({"kappa", "delta_alpha", "R"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--config", sweep_cfg, "Configuration file")->required();
  int sweep_trials = 20;
  sweep->add_option("--trials", sweep_trials, "Trials per sweep point")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*exp1) {
      print_summary(modadc::run_experiment1(kappa, seed1, n1, out1));
    } else if (*exp2) {
      print_summary(modadc::run_experiment2(seed2, out2));
    } else if (*run) {
      auto cfg = load_cli_config(run_cfg);
      if (trials) cfg.trials = *trials;
      cfg.validate();
      if (cfg.trials == 1) {
        const auto single = modadc::run_single(cfg);
        if (!cfg.out_dir.empty()) modadc::write_outputs(cfg.out_dir, cfg, single.run);
        print_summary(single.run.summary);
      } else {
        print_aggregate(modadc::run_generic(cfg));
      }
    } else if (*verify) {
      const auto rep = modadc::verify_outputs(verify_dir);
      if (!rep.ok) {
        for (const auto& m : rep.mismatches) std::cerr << "mismatch: " << m << "\n";
        return kVerifyFailure;
      }
      std::cout << "verify: ok\n";
    } else if (*sweep) {
      auto cfg = load_cli_config(sweep_cfg);
      cfg.trials = sweep_trials;
      for (const auto& pt : modadc::run_sweep(cfg, sweep_param, parse_list(sweep_values))) {
        std::cout << "# " << sweep_param << " = " << modadc::format_double(pt.value) << "\n";
        print_aggregate(pt.result);
      }
    }
  } catch (const modadc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const modadc::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kVerifyFailure;
  } catch (const modadc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
  return kOk;
}
