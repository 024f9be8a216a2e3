#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mzr/mesh.hpp"
#include "mzr/problems.hpp"

// key = value run configuration. Unknown keys are a hard error; omitted keys
// take documented, problem-dependent defaults.

namespace mzr {

enum class RunMode { adaptive, global, mc, verify, table };

struct RunConfig {
  std::string problem = "ode";
  RunMode mode = RunMode::adaptive;
  int p_r = 3;
  int p_f = 7;
  double tol1 = 1e-2;
  double tol2 = 0.1;
  double dt = 1e-2;
  double t_end = 10.0;
  double sample_dt = 0.1;
  std::string indicator_mode = "full-state";     // or "dual-evolution"
  std::string memory_time_mode = "global";       // or "element-local"
  int refine_stride = 1;
  int max_elements = 10000;
  std::uint64_t seed = 12345;
  std::uint64_t mc_samples = 100000;
  double mc_dt = 1e-2;
  double u0 = 1.0;
  std::string out_dir = "out";
  int threads = 1;

  ProblemSpec spec() const { return ProblemSpec::from_name(problem, u0); }

  IndicatorMode indicator() const {
    return indicator_mode == "dual-evolution" ? IndicatorMode::dual_evolution
                                              : IndicatorMode::full_state;
  }
  MemoryTimeMode memory_time() const {
    return memory_time_mode == "element-local" ? MemoryTimeMode::element_local
                                               : MemoryTimeMode::global_time;
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v, int line) {
  long long x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "' expects an integer, got '" + v + "'");
  return x;
}

inline std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& document) {
  RunConfig cfg;
  std::map<std::string, bool> seen;
  std::istringstream in(document);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
    s = detail::trim(s);
    if (s.empty()) continue;
    // Tolerate a braced wrapper around the document.
    if (s.front() == '{') s = detail::trim(s.substr(1));
    if (!s.empty() && s.back() == '}') s = detail::trim(s.substr(0, s.size() - 1));
    if (s.empty()) continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected 'key = value', got '" + raw + "'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::unquote(detail::trim(s.substr(eq + 1)));
    if (seen.count(key))
      throw ConfigError("config line " + std::to_string(line) + ": duplicate key '" +
                        key + "'");
    seen[key] = true;

    if (key == "problem") cfg.problem = val;
    else if (key == "mode") {
      if (val == "adaptive") cfg.mode = RunMode::adaptive;
      else if (val == "global") cfg.mode = RunMode::global;
      else if (val == "mc") cfg.mode = RunMode::mc;
      else if (val == "verify") cfg.mode = RunMode::verify;
      else if (val == "table") cfg.mode = RunMode::table;
      else
        throw ConfigError("config line " + std::to_string(line) +
                          ": unknown mode '" + val + "'");
    } else if (key == "p_r") cfg.p_r = static_cast<int>(detail::parse_int(key, val, line));
    else if (key == "p_f") cfg.p_f = static_cast<int>(detail::parse_int(key, val, line));
    else if (key == "tol1") cfg.tol1 = detail::parse_double(key, val, line);
    else if (key == "tol2") cfg.tol2 = detail::parse_double(key, val, line);
    else if (key == "dt") cfg.dt = detail::parse_double(key, val, line);
    else if (key == "t_end") cfg.t_end = detail::parse_double(key, val, line);
    else if (key == "sample_dt") cfg.sample_dt = detail::parse_double(key, val, line);
    else if (key == "indicator_mode") {
      if (val != "full-state" && val != "dual-evolution")
        throw ConfigError("config line " + std::to_string(line) +
                          ": indicator_mode must be full-state or dual-evolution");
      cfg.indicator_mode = val;
    } else if (key == "memory_time_mode") {
      if (val != "global" && val != "element-local")
        throw ConfigError("config line " + std::to_string(line) +
                          ": memory_time_mode must be global or element-local");
      cfg.memory_time_mode = val;
    } else if (key == "refine_stride")
      cfg.refine_stride = static_cast<int>(detail::parse_int(key, val, line));
    else if (key == "max_elements")
      cfg.max_elements = static_cast<int>(detail::parse_int(key, val, line));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, val, line));
    else if (key == "mc_samples")
      cfg.mc_samples = static_cast<std::uint64_t>(detail::parse_int(key, val, line));
    else if (key == "mc_dt") cfg.mc_dt = detail::parse_double(key, val, line);
    else if (key == "u0") cfg.u0 = detail::parse_double(key, val, line);
    else if (key == "out_dir") cfg.out_dir = val;
    else if (key == "threads")
      cfg.threads = static_cast<int>(detail::parse_int(key, val, line));
    else
      throw ConfigError("config line " + std::to_string(line) + ": unknown key '" +
                        key + "'");

    if (key == "tol1" && cfg.tol1 <= 0.0)
      throw ConfigError("config line " + std::to_string(line) + ": tol1 must be > 0");
    if (key == "tol2" && (cfg.tol2 <= 0.0 || cfg.tol2 > 1.0))
      throw ConfigError("config line " + std::to_string(line) +
                        ": tol2 must be in (0, 1]");
    if (key == "dt" && cfg.dt <= 0.0)
      throw ConfigError("config line " + std::to_string(line) + ": dt must be > 0");
  }

  // Problem-dependent defaults for keys not given explicitly.
  ProblemSpec spec = cfg.spec();  // validates the problem name
  if (!seen.count("dt")) cfg.dt = spec.kind == ProblemKind::linear_decay ? 1e-2 : 1e-3;
  if (!seen.count("t_end")) {
    if (spec.kind == ProblemKind::linear_decay) cfg.t_end = 10.0;
    else if (spec.dimension == 1) cfg.t_end = 30.0;
    else if (spec.dimension == 2) cfg.t_end = 10.0;
    else cfg.t_end = 6.0;
  }
  return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  const char* mode = cfg.mode == RunMode::adaptive  ? "adaptive"
                     : cfg.mode == RunMode::global  ? "global"
                     : cfg.mode == RunMode::mc      ? "mc"
                     : cfg.mode == RunMode::verify  ? "verify"
                                                    : "table";
  os << "problem = " << cfg.problem << "\n"
     << "mode = " << mode << "\n"
     << "p_r = " << cfg.p_r << "\n"
     << "p_f = " << cfg.p_f << "\n"
     << "tol1 = " << cfg.tol1 << "\n"
     << "tol2 = " << cfg.tol2 << "\n"
     << "dt = " << cfg.dt << "\n"
     << "t_end = " << cfg.t_end << "\n"
     << "sample_dt = " << cfg.sample_dt << "\n"
     << "indicator_mode = " << cfg.indicator_mode << "\n"
     << "memory_time_mode = " << cfg.memory_time_mode << "\n"
     << "refine_stride = " << cfg.refine_stride << "\n"
     << "max_elements = " << cfg.max_elements << "\n"
     << "seed = " << cfg.seed << "\n"
     << "mc_samples = " << cfg.mc_samples << "\n"
     << "mc_dt = " << cfg.mc_dt << "\n"
     << "u0 = " << cfg.u0 << "\n"
     << "out_dir = " << cfg.out_dir << "\n"
     << "threads = " << cfg.threads << "\n";
  return os.str();
}

}  // namespace mzr
