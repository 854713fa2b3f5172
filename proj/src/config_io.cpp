#include "modadc/config_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "modadc/errors.hpp"

namespace modadc {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  adc.validate();
  if (n_samples <= static_cast<std::size_t>(adc.p) + 1) {
    throw ConfigError("config field 'n_samples': must exceed p + 1");
  }
  if (trials < 1) throw ConfigError("config field 'trials': must be >= 1");
  if (signal.kind == SignalKind::MaGaussian && signal.ma.L_x < 1) {
    throw ConfigError("config field 'signal.L_x': must be >= 1");
  }
  if (signal.kind == SignalKind::BandlimitedRademacher) {
    const auto& b = signal.bandlimited;
    if (!(b.passband_edge > 0.0 && b.passband_edge < b.stopband_edge && b.stopband_edge < 1.0)) {
      throw ConfigError("config fields 'signal.passband_edge'/'signal.stopband_edge': need 0 < pass < stop < 1");
    }
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected true/false, got '" + s + "'");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string format_config(const ExperimentConfig& cfg) {
  const auto& a = cfg.adc;
  const auto& s = cfg.signal;
  std::ostringstream os;
  os << "# modadc experiment configuration\n";
  os << "R = " << a.R << "\n";
  os << "alpha0 = " << format_double(a.alpha0) << "\n";
  os << "p = " << a.p << "\n";
  os << "h0 = " << join_doubles(a.h0) << "\n";
  os << "kappa = " << format_double(a.kappa) << "\n";
  os << "L_s = " << a.L_s << "\n";
  os << "N_s = " << a.N_s << "\n";
  os << "eps_mu = " << format_double(a.eps_mu) << "\n";
  os << "delta_alpha = " << format_double(a.delta_alpha) << "\n";
  os << "beta = " << format_double(a.beta) << "\n";
  os << "seed = " << a.seed << "\n";
  os << "steady_state_enabled = " << (a.steady_state_enabled ? "true" : "false") << "\n";
  os << "adapt_mu = " << (a.adapt_mu ? "true" : "false") << "\n";
  os << "freeze_alpha = " << (a.freeze_alpha ? "true" : "false") << "\n";
  os << "dither = " << (a.dither == DitherMode::Random ? "random" : "deterministic") << "\n";
  os << "signal.kind = " << to_string(s.kind) << "\n";
  os << "signal.L_x = " << s.ma.L_x << "\n";
  os << "signal.seed = " << (s.kind == SignalKind::MaGaussian ? s.ma.seed : s.bandlimited.seed) << "\n";
  os << "signal.passband_edge = " << format_double(s.bandlimited.passband_edge) << "\n";
  os << "signal.stopband_edge = " << format_double(s.bandlimited.stopband_edge) << "\n";
  os << "signal.stopband_atten_db = " << format_double(s.bandlimited.stopband_atten_db) << "\n";
  for (std::size_t i = 0; i < s.interferers.size(); ++i) {
    const auto& it = s.interferers[i];
    os << "interferer." << (i + 1) << " = " << format_double(it.g) << ", " << format_double(it.omega)
       << ", " << it.tau << ", " << it.phase_seed << "\n";
  }
  os << "n_samples = " << cfg.n_samples << "\n";
  os << "trials = " << cfg.trials << "\n";
  os << "base_seed = " << cfg.base_seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  return os.str();
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  auto& a = cfg.adc;
  auto& s = cfg.signal;
  std::uint64_t signal_seed = 0;
  std::map<int, InterfererSpec> interferers;
  std::set<std::string> seen;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      if (key == "R") a.R = parse_int<int>(val);
      else if (key == "alpha0") a.alpha0 = parse_double(val);
      else if (key == "p") a.p = parse_int<int>(val);
      else if (key == "h0") {
        a.h0.clear();
        if (!val.empty()) {
          for (const auto& part : split(val, ',')) a.h0.push_back(parse_double(part));
        }
      }
      else if (key == "kappa") a.kappa = parse_double(val);
      else if (key == "L_s") a.L_s = parse_int<int>(val);
      else if (key == "N_s") a.N_s = parse_int<int>(val);
      else if (key == "eps_mu") a.eps_mu = parse_double(val);
      else if (key == "delta_alpha") a.delta_alpha = parse_double(val);
      else if (key == "beta") a.beta = parse_double(val);
      else if (key == "seed") a.seed = parse_int<std::uint64_t>(val);
      else if (key == "steady_state_enabled") a.steady_state_enabled = parse_bool(val);
      else if (key == "adapt_mu") a.adapt_mu = parse_bool(val);
      else if (key == "freeze_alpha") a.freeze_alpha = parse_bool(val);
      else if (key == "dither") {
        if (val == "random") a.dither = DitherMode::Random;
        else if (val == "deterministic") a.dither = DitherMode::Deterministic;
        else throw ConfigError("expected random/deterministic, got '" + val + "'");
      }
      else if (key == "signal.kind") s.kind = signal_kind_from_string(val);
      else if (key == "signal.L_x") s.ma.L_x = parse_int<int>(val);
      else if (key == "signal.seed") signal_seed = parse_int<std::uint64_t>(val);
      else if (key == "signal.passband_edge") s.bandlimited.passband_edge = parse_double(val);
      else if (key == "signal.stopband_edge") s.bandlimited.stopband_edge = parse_double(val);
      else if (key == "signal.stopband_atten_db") s.bandlimited.stopband_atten_db = parse_double(val);
      else if (key.rfind("interferer.", 0) == 0) {
        const int idx = parse_int<int>(key.substr(11));
        if (idx < 1) throw ConfigError("interferer index must be >= 1");
        const auto parts = split(val, ',');
        if (parts.size() != 4) throw ConfigError("expected 'g, omega, tau, phase_seed'");
        interferers[idx] = {parse_double(parts[0]), parse_double(parts[1]),
                            parse_int<std::int64_t>(parts[2]), parse_int<std::uint64_t>(parts[3])};
      }
      else if (key == "n_samples") cfg.n_samples = parse_int<std::size_t>(val);
      else if (key == "trials") cfg.trials = parse_int<int>(val);
      else if (key == "base_seed") cfg.base_seed = parse_int<std::uint64_t>(val);
      else if (key == "out_dir") cfg.out_dir = val;
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source, 0) == 0) throw;
      throw ConfigError(where + ": field '" + key + "': " + msg);
    }
  }
  s.ma.seed = signal_seed;
  s.bandlimited.seed = signal_seed;
  int expected = 1;
  for (const auto& [idx, spec] : interferers) {
    if (idx != expected++) throw ConfigError(source + ": interferer indices must be 1..K without gaps");
    s.interferers.push_back(spec);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void save_config(const ExperimentConfig& cfg, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << format_config(cfg);
}

void emit_trace(std::span<const TraceRecord> trace, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << kTraceHeader << "\n";
  for (const auto& r : trace) {
    out << r.n << ',' << format_double(r.x) << ',' << format_double(r.v) << ','
        << format_double(r.y) << ',' << format_double(r.v_hat) << ',' << format_double(r.v_hat_p)
        << ',' << format_double(r.e_hat) << ',' << format_double(r.alpha) << ','
        << format_double(r.M) << ',' << int(r.flag_error) << ',' << int(r.flag_res_up) << ','
        << int(r.flag_res_down) << ',' << int(r.flag_steady) << ',' << int(r.flag_reinit) << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string> read_csv_rows(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw IoError(path.string() + ":1: unexpected header");
  }
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) rows.push_back(line);
  }
  return rows;
}

double field_double(const std::vector<std::string>& f, std::size_t i, const std::string& where) {
  try {
    return parse_double(f.at(i));
  } catch (const std::exception& e) {
    throw IoError(where + ": column " + std::to_string(i + 1) + ": " + e.what());
  }
}

}  // namespace

std::vector<TraceRecord> load_trace(const fs::path& path) {
  const auto rows = read_csv_rows(path, kTraceHeader);
  std::vector<TraceRecord> out;
  out.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string where = path.string() + ":" + std::to_string(k + 2);
    const auto f = split(rows[k], ',');
    if (f.size() != 14) throw IoError(where + ": expected 14 columns");
    TraceRecord r;
    r.n = static_cast<std::int64_t>(field_double(f, 0, where));
    r.x = field_double(f, 1, where);
    r.v = field_double(f, 2, where);
    r.y = field_double(f, 3, where);
    r.v_hat = field_double(f, 4, where);
    r.v_hat_p = field_double(f, 5, where);
    r.e_hat = field_double(f, 6, where);
    r.alpha = field_double(f, 7, where);
    r.M = field_double(f, 8, where);
    r.flag_error = field_double(f, 9, where) != 0.0;
    r.flag_res_up = field_double(f, 10, where) != 0.0;
    r.flag_res_down = field_double(f, 11, where) != 0.0;
    r.flag_steady = field_double(f, 12, where) != 0.0;
    r.flag_reinit = field_double(f, 13, where) != 0.0;
    out.push_back(r);
  }
  return out;
}

void emit_truth(std::span<const TraceRecord> trace, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << kTruthHeader << "\n";
  for (const auto& r : trace) {
    out << r.n << ',' << format_double(r.x) << ',' << format_double(r.v) << "\n";
  }
}

std::vector<double> load_truth_v(const fs::path& path) {
  const auto rows = read_csv_rows(path, kTruthHeader);
  std::vector<double> v;
  v.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::string where = path.string() + ":" + std::to_string(k + 2);
    const auto f = split(rows[k], ',');
    if (f.size() != 3) throw IoError(where + ": expected 3 columns");
    v.push_back(field_double(f, 2, where));
  }
  return v;
}

std::string summary_to_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["n_samples"] = s.n_samples;
  j["n_wrong"] = s.n_wrong;
  j["empirical_error_prob"] = s.empirical_error_prob;
  j["mean_sq_v_error"] = s.mean_sq_v_error;
  j["tail_mean_M"] = s.tail_mean_M;
  j["n_error_events"] = s.n_error_events;
  j["n_resolution_ups"] = s.n_resolution_ups;
  j["n_resolution_downs"] = s.n_resolution_downs;
  if (s.steady_state_index) j["steady_state_index"] = *s.steady_state_index;
  else j["steady_state_index"] = nullptr;
  j["sigma_bar_p"] = s.sigma_bar_p;
  j["predicted_M_inf"] = s.predicted_M_inf;
  return j.dump(2) + "\n";
}

RunSummary summary_from_json(const std::string& text) {
  RunSummary s;
  try {
    const auto j = nlohmann::json::parse(text);
    auto num = [&](const char* k) { return j.at(k).get<double>(); };
    s.n_samples = j.at("n_samples").get<std::int64_t>();
    s.n_wrong = j.at("n_wrong").get<std::int64_t>();
    s.empirical_error_prob = num("empirical_error_prob");
    s.mean_sq_v_error = num("mean_sq_v_error");
    s.tail_mean_M = num("tail_mean_M");
    s.n_error_events = j.at("n_error_events").get<std::int64_t>();
    s.n_resolution_ups = j.at("n_resolution_ups").get<std::int64_t>();
    s.n_resolution_downs = j.at("n_resolution_downs").get<std::int64_t>();
    if (!j.at("steady_state_index").is_null()) {
      s.steady_state_index = j.at("steady_state_index").get<std::int64_t>();
    }
    s.sigma_bar_p = num("sigma_bar_p");
    s.predicted_M_inf = num("predicted_M_inf");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("summary: ") + e.what());
  }
  return s;
}

}  // namespace modadc
