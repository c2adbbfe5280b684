#pragma once

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdgdd/dd_problem.hpp"
#include "hdgdd/monolithic.hpp"
#include "hdgdd/schwarz_nn.hpp"
#include "hdgdd/schwarz_tf.hpp"

namespace hdgdd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { kMonolithic, kNN, kTF };

struct ExperimentConfig {
  double h = 1.0 / 32.0;
  int n = 2;                       // equal strips, unless alpha/breakpoints set
  std::optional<double> alpha;     // two strips split at x = alpha
  std::vector<double> breakpoints;  // explicit strips, overrides n and alpha
  Algorithm algo = Algorithm::kMonolithic;
  double theta = 0.25;
  double tau = 1.0;
  double tol = 1e-6;
  int max_iter = 1000;
  int nn_sign = -1;
  SignConvention tf_signs = SignConvention::kOriented;
  std::string out = "out";
};

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kMonolithic: return "monolithic";
    case Algorithm::kNN: return "nn";
    case Algorithm::kTF: return "tf";
  }
  return "unknown";
}

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ConfigError("invalid value '" + text + "' for " + key);
  return static_cast<int>(v);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(detail::parse_real(key, detail::trim(item)));
  if (values.empty()) throw ConfigError("empty list for " + key);
  return values;
}

/// Sets one configuration key. Keys match the CLI long flags.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  using detail::parse_int;
  using detail::parse_real;
  if (key == "h") {
    cfg.h = parse_real(key, value);
  } else if (key == "n") {
    cfg.n = parse_int(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_real(key, value);
  } else if (key == "breakpoints") {
    cfg.breakpoints = parse_real_list(key, value);
  } else if (key == "algo") {
    if (value == "monolithic") cfg.algo = Algorithm::kMonolithic;
    else if (value == "nn") cfg.algo = Algorithm::kNN;
    else if (value == "tf") cfg.algo = Algorithm::kTF;
    else throw ConfigError("algo must be monolithic, nn or tf (got '" + value + "')");
  } else if (key == "theta") {
    cfg.theta = parse_real(key, value);
  } else if (key == "tau") {
    cfg.tau = parse_real(key, value);
  } else if (key == "tol") {
    cfg.tol = parse_real(key, value);
  } else if (key == "max-iter") {
    cfg.max_iter = parse_int(key, value);
  } else if (key == "nn-sign") {
    if (value == "minus") cfg.nn_sign = -1;
    else if (value == "plus") cfg.nn_sign = 1;
    else throw ConfigError("nn-sign must be plus or minus (got '" + value + "')");
  } else if (key == "tf-signs") {
    if (value == "oriented") cfg.tf_signs = SignConvention::kOriented;
    else if (value == "literal") cfg.tf_signs = SignConvention::kLiteral;
    else throw ConfigError("tf-signs must be oriented or literal (got '" + value + "')");
  } else if (key == "out") {
    cfg.out = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Flat `key = value` text, `#` starts a comment.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig cfg = {}) {
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline void validate(const ExperimentConfig& cfg) {
  if (!(cfg.h > 0.0 && cfg.h <= 1.0)) throw ConfigError("h must be in (0, 1]");
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 1.0)) {
    throw ConfigError("alpha must be in (0, 1)");
  }
  if (!(cfg.theta > 0.0)) throw ConfigError("theta must be > 0");
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be > 0");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (cfg.max_iter < 1) throw ConfigError("max-iter must be >= 1");
}

inline std::vector<double> breakpoints_of(const ExperimentConfig& cfg) {
  if (!cfg.breakpoints.empty()) return cfg.breakpoints;
  if (cfg.alpha) return {0.0, *cfg.alpha, 1.0};
  return equal_breakpoints(cfg.n);
}

inline nlohmann::ordered_json config_echo(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["algo"] = to_string(cfg.algo);
  j["h"] = cfg.h;
  j["breakpoints"] = breakpoints_of(cfg);
  j["theta"] = cfg.theta;
  j["tau"] = cfg.tau;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["nn_sign"] = cfg.nn_sign < 0 ? "minus" : "plus";
  j["tf_signs"] = cfg.tf_signs == SignConvention::kOriented ? "oriented" : "literal";
  return j;
}

struct RunReport {
  ExperimentConfig config;
  RunStatus status = RunStatus::kMaxIter;
  int iterations = 0;
  double err_q = 0.0;
  double err_u = 0.0;
  IterationHistory history;
  /// Set when the run threw instead of finishing.
  std::optional<std::string> error;

  [[nodiscard]] std::string status_name() const {
    return error ? "error" : std::string(hdgdd::to_string(status));
  }
};

/// Executes the configured algorithm on the sine test problem.
inline RunReport run(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport rep;
  rep.config = cfg;
  Stopwatch clock;
  DDProblem problem(decompose_strips(breakpoints_of(cfg), cfg.h), cfg.tau, sine_problem());
  switch (cfg.algo) {
    case Algorithm::kMonolithic: {
      const MonolithicReference ref = solve_monolithic(problem);
      const ErrorNorms e = l2_errors(*ref.system, ref.solution, problem.exact());
      rep.status = RunStatus::kConverged;
      rep.history.push_back({1, e.q(), e.u(), std::numeric_limits<double>::quiet_NaN(),
                             clock.elapsed_ms()});
      break;
    }
    case Algorithm::kNN: {
      NNConfig nc{cfg.theta, cfg.tol, cfg.max_iter, cfg.nn_sign};
      NNResult r = run_nn(nc, problem);
      rep.status = r.status;
      rep.history = std::move(r.history);
      break;
    }
    case Algorithm::kTF: {
      TFConfig tc{cfg.tol, cfg.max_iter, cfg.tf_signs};
      TFResult r = run_tf(tc, problem);
      rep.status = r.status;
      rep.history = std::move(r.history);
      break;
    }
  }
  rep.iterations = static_cast<int>(rep.history.size());
  rep.err_q = rep.history.back().err_q;
  rep.err_u = rep.history.back().err_u;
  return rep;
}

/// 0 converged, 2 maxiter, 3 diverged (1 is reserved for usage errors).
inline int exit_code(const RunReport& r) {
  if (r.error) return 1;
  switch (r.status) {
    case RunStatus::kConverged: return 0;
    case RunStatus::kMaxIter: return 2;
    case RunStatus::kDiverged: return 3;
  }
  return 1;
}

inline std::string format_sci(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

inline void write_history_csv(std::ostream& os, const IterationHistory& history) {
  os << "iter,err_q,err_u,interface_diff,wall_ms\n";
  for (const auto& r : history) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    os << r.iteration << ',' << format_sci(r.err_q) << ',' << format_sci(r.err_u) << ','
       << format_sci(r.interface_diff) << ',' << wall << '\n';
  }
}

inline nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["status"] = r.status_name();
  j["iterations"] = r.iterations;
  j["err_q"] = r.err_q;
  j["err_u"] = r.err_u;
  if (r.error) j["error"] = *r.error;
  j["config"] = config_echo(r.config);
  return j;
}

enum class SweepParameter { kTheta, kAlpha, kN };

inline SweepParameter parse_sweep_parameter(const std::string& s) {
  if (s == "theta") return SweepParameter::kTheta;
  if (s == "alpha") return SweepParameter::kAlpha;
  if (s == "N" || s == "n") return SweepParameter::kN;
  throw ConfigError("sweep parameter must be theta, alpha or N (got '" + s + "')");
}

struct SweepResult {
  SweepParameter parameter = SweepParameter::kTheta;
  std::vector<double> values;
  std::vector<RunReport> runs;
  /// Least-squares slope of log(iterations) against log(N) (N sweeps only).
  std::optional<double> loglog_slope;
};

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// One run per value; failures are recorded and the sweep continues.
inline SweepResult sweep(const ExperimentConfig& base, SweepParameter param,
                         const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult res;
  res.parameter = param;
  res.values = values;
  res.runs.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    ExperimentConfig cfg = base;
    switch (param) {
      case SweepParameter::kTheta:
        cfg.theta = values[k];
        break;
      case SweepParameter::kAlpha:
        cfg.alpha = values[k];
        cfg.breakpoints.clear();
        break;
      case SweepParameter::kN:
        cfg.n = static_cast<int>(std::lround(values[k]));
        cfg.alpha.reset();
        cfg.breakpoints.clear();
        break;
    }
    try {
      res.runs[k] = run(cfg);
    } catch (const std::exception& e) {
      res.runs[k].config = cfg;
      res.runs[k].error = e.what();
    }
  }
  if (param == SweepParameter::kN) {
    std::vector<double> ns, its;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!res.runs[k].error && res.runs[k].status == RunStatus::kConverged) {
        ns.push_back(values[k]);
        its.push_back(res.runs[k].iterations);
      }
    }
    if (ns.size() >= 2) res.loglog_slope = loglog_slope(ns, its);
  }
  return res;
}

inline void write_summary_csv(std::ostream& os, const SweepResult& s) {
  os << "value,status,iterations,err_q,err_u\n";
  for (std::size_t k = 0; k < s.runs.size(); ++k) {
    const auto& r = s.runs[k];
    os << format_double(s.values[k]) << ',' << r.status_name() << ',' << r.iterations << ','
       << format_sci(r.err_q) << ',' << format_sci(r.err_u) << '\n';
  }
}

struct OrderRow {
  double h = 0.0;
  double err_u = 0.0;
  double err_q = 0.0;
  std::optional<double> rate_u;
  std::optional<double> rate_q;
};

/// Monolithic errors on successively refined meshes and observed rates.
inline std::vector<OrderRow> convergence_order(const std::vector<double>& hs, double tau = 1.0) {
  if (hs.size() < 3) throw ConfigError("convergence order needs at least three mesh sizes");
  std::vector<OrderRow> rows;
  for (double h : hs) {
    ExperimentConfig cfg;
    cfg.h = h;
    cfg.n = 1;
    cfg.tau = tau;
    const RunReport r = run(cfg);
    OrderRow row{h, r.err_u, r.err_q, {}, {}};
    if (!rows.empty()) {
      const OrderRow& prev = rows.back();
      const double ratio = std::log(prev.h / h);
      row.rate_u = std::log(prev.err_u / row.err_u) / ratio;
      row.rate_q = std::log(prev.err_q / row.err_q) / ratio;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_order_csv(std::ostream& os, const std::vector<OrderRow>& rows) {
  os << "h,err_u,err_q,rate_u,rate_q\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << format_double(r.h) << ',' << format_sci(r.err_u) << ',' << format_sci(r.err_q) << ','
       << opt(r.rate_u) << ',' << opt(r.rate_q) << '\n';
  }
}

}  // namespace hdgdd
