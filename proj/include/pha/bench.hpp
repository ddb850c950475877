#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pha/cpsolver.hpp"

namespace pha::bench {

// ---------------------------------------------------------------------------
// Experiment configuration
//
// Flat "key = value" text, one pair per line; '#' starts a comment. Keys:
//
//   problem            matrix_game | lasso                      (required)
//   variant            uniform_pm1 | normal01 | normal0_10 | sparse_uniform
//                      (games), gaussian | correlated (lasso)    (required)
//   p, q               dimensions of K (p x q); game defaults per variant,
//                      lasso defaults p = 1000, q = 2000
//   s                  lasso sparsity, default 100
//   mu                 lasso weight, default 0.1
//   corr_v             column correlation, correlated lasso only, default 0.5
//   seed               default 50 (games), 100 (lasso)
//   algorithms         comma list of cp, hcp, restarted_hcp, acp, restarted_acp;
//                      default all five
//   max_iters          default 20000 (games), 10000 (lasso)
//   restart_period     default 450 (games), 400 (lasso)
//   metric_cadence     default 10
//   stop_tol           M-residual tolerance, default 0 (run the full budget)
//   output_path        directory for traces, default "out"
//   time_limit_seconds per-algorithm wall-clock limit, default none
//   fstar              lasso optimum source: reference | planted, default reference
//   reference_iters    lasso CP reference run length, default 100000
// ---------------------------------------------------------------------------

enum class ProblemKind { matrix_game, lasso };

inline constexpr std::string_view to_string(ProblemKind p) {
  return p == ProblemKind::matrix_game ? "matrix_game" : "lasso";
}

/// Experiment-level algorithm labels and the engines they select.
struct AlgorithmLabel {
  std::string_view label;
  Algorithm algorithm;
};

inline constexpr AlgorithmLabel kAlgorithmLabels[] = {
    {"cp", Algorithm::picard},
    {"hcp", Algorithm::halpern_fixed},
    {"restarted_hcp", Algorithm::restarted_halpern},
    {"acp", Algorithm::pha},
    {"restarted_acp", Algorithm::restarted_pha},
};

inline std::optional<Algorithm> algorithm_for_label(std::string_view label) {
  for (const auto& a : kAlgorithmLabels)
    if (a.label == label) return a.algorithm;
  return std::nullopt;
}

inline std::string_view label_for(Algorithm alg) {
  for (const auto& a : kAlgorithmLabels)
    if (a.algorithm == alg) return a.label;
  return "?";
}

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::matrix_game;
  std::string variant;
  Index p = 0;
  Index q = 0;
  Index s = 0;
  double mu = kLassoDefaultMu;
  std::optional<double> corr_v;
  std::uint64_t seed = 0;
  std::vector<std::string> algorithms;
  long max_iters = 0;
  long restart_period = 0;
  long metric_cadence = 10;
  double stop_tol = 0.0;
  std::string output_path = "out";
  std::optional<double> time_limit_seconds;
  std::string fstar = "reference";
  long reference_iters = 100000;

  /// Checks cross-field rules; throws ConfigError.
  void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt(double x) { return pha::detail::fmt17(x); }

inline long parse_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(out)) {
    throw ConfigError("config: '" + key + "' expects a finite number, got '" + v + "'");
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (problem == ProblemKind::matrix_game) {
    if (!parse_game_variant(variant)) fail("unknown matrix_game variant '" + variant + "'");
    if (p < 1 || q < 1) fail("p and q must be >= 1");
  } else {
    const auto lv = parse_lasso_variant(variant);
    if (!lv) fail("unknown lasso variant '" + variant + "'");
    if (p < 1 || q < 1) fail("p and q must be >= 1");
    if (s < 0 || s > q) fail("s must satisfy 0 <= s <= q");
    if (!(mu > 0.0)) fail("mu must be > 0");
    if ((*lv == LassoVariant::correlated) != corr_v.has_value()) fail("corr_v applies to the correlated variant only");
    if (corr_v && !(*corr_v >= 0.0 && *corr_v < 1.0)) fail("corr_v must lie in [0, 1)");
    if (fstar != "reference" && fstar != "planted") fail("fstar must be 'reference' or 'planted'");
    if (reference_iters < 1) fail("reference_iters must be >= 1");
  }
  if (algorithms.empty()) fail("algorithms must not be empty");
  for (const auto& a : algorithms)
    if (!algorithm_for_label(a)) fail("unknown algorithm '" + a + "'");
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (restart_period < 1) fail("restart_period must be >= 1");
  if (metric_cadence < 1) fail("metric_cadence must be >= 1");
  if (!(stop_tol >= 0.0)) fail("stop_tol must be >= 0");
  if (time_limit_seconds && !(*time_limit_seconds > 0.0)) fail("time_limit_seconds must be > 0");
  if (output_path.empty()) fail("output_path must not be empty");
}

/// Parses and validates a config, filling defaults.
inline ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw ConfigError("config: duplicate key '" + key + "'");
  }

  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  ExperimentConfig cfg;
  const auto problem = take("problem");
  if (!problem) throw ConfigError("config: missing required key 'problem'");
  if (*problem == "matrix_game") {
    cfg.problem = ProblemKind::matrix_game;
  } else if (*problem == "lasso") {
    cfg.problem = ProblemKind::lasso;
  } else {
    throw ConfigError("config: unknown problem '" + *problem + "'");
  }
  const auto variant = take("variant");
  if (!variant) throw ConfigError("config: missing required key 'variant'");
  cfg.variant = *variant;

  const bool game = cfg.problem == ProblemKind::matrix_game;
  if (game) {
    const auto gv = parse_game_variant(cfg.variant);
    if (!gv) throw ConfigError("config: unknown matrix_game variant '" + cfg.variant + "'");
    const GameDims d = default_game_dims(*gv);
    cfg.p = d.p;
    cfg.q = d.q;
    cfg.seed = 50;
    cfg.max_iters = 20000;
    cfg.restart_period = 450;
  } else {
    const LassoDims d;
    cfg.p = d.p;
    cfg.q = d.q;
    cfg.s = d.s;
    cfg.seed = 100;
    cfg.max_iters = 10000;
    cfg.restart_period = 400;
    if (cfg.variant == "correlated") cfg.corr_v = kLassoDefaultCorrelation;
  }
  cfg.algorithms = {"cp", "hcp", "restarted_hcp", "acp", "restarted_acp"};

  if (auto v = take("p")) cfg.p = detail::parse_long("p", *v);
  if (auto v = take("q")) cfg.q = detail::parse_long("q", *v);
  if (auto v = take("seed")) {
    const long s = detail::parse_long("seed", *v);
    if (s < 0) throw ConfigError("config: seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = take("algorithms")) cfg.algorithms = detail::split_list(*v);
  if (auto v = take("max_iters")) cfg.max_iters = detail::parse_long("max_iters", *v);
  if (auto v = take("restart_period")) cfg.restart_period = detail::parse_long("restart_period", *v);
  if (auto v = take("metric_cadence")) cfg.metric_cadence = detail::parse_long("metric_cadence", *v);
  if (auto v = take("stop_tol")) cfg.stop_tol = detail::parse_double("stop_tol", *v);
  if (auto v = take("output_path")) cfg.output_path = *v;
  if (auto v = take("time_limit_seconds")) cfg.time_limit_seconds = detail::parse_double("time_limit_seconds", *v);
  if (!game) {
    if (auto v = take("s")) cfg.s = detail::parse_long("s", *v);
    if (auto v = take("mu")) cfg.mu = detail::parse_double("mu", *v);
    if (auto v = take("corr_v")) cfg.corr_v = detail::parse_double("corr_v", *v);
    if (auto v = take("fstar")) cfg.fstar = *v;
    if (auto v = take("reference_iters")) cfg.reference_iters = detail::parse_long("reference_iters", *v);
  }
  if (!kv.empty()) {
    throw ConfigError("config: unknown key '" + kv.begin()->first + "' for problem " + std::string(to_string(cfg.problem)));
  }
  cfg.validate();
  return cfg;
}

/// Canonical text form: every effective key in a fixed order.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "problem = " << to_string(cfg.problem) << '\n';
  os << "variant = " << cfg.variant << '\n';
  os << "p = " << cfg.p << '\n';
  os << "q = " << cfg.q << '\n';
  if (cfg.problem == ProblemKind::lasso) {
    os << "s = " << cfg.s << '\n';
    os << "mu = " << detail::fmt(cfg.mu) << '\n';
    if (cfg.corr_v) os << "corr_v = " << detail::fmt(*cfg.corr_v) << '\n';
  }
  os << "seed = " << cfg.seed << '\n';
  os << "algorithms = ";
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) os << (i ? "," : "") << cfg.algorithms[i];
  os << '\n';
  os << "max_iters = " << cfg.max_iters << '\n';
  os << "restart_period = " << cfg.restart_period << '\n';
  os << "metric_cadence = " << cfg.metric_cadence << '\n';
  os << "stop_tol = " << detail::fmt(cfg.stop_tol) << '\n';
  os << "output_path = " << cfg.output_path << '\n';
  if (cfg.time_limit_seconds) os << "time_limit_seconds = " << detail::fmt(*cfg.time_limit_seconds) << '\n';
  if (cfg.problem == ProblemKind::lasso) {
    os << "fstar = " << cfg.fstar << '\n';
    os << "reference_iters = " << cfg.reference_iters << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Trace files
//
// Leading "# key=value" metadata lines, then the CSV header
//   k,phi,m_residual,residual,gap,objective_error,elapsed_seconds
// then one row per recorded iteration. Absent metrics are empty fields;
// numbers use 17 significant digits; an infinite phi is written "inf".
// A run stopped by its time limit ends with the line "# truncated".
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTraceHeader = "k,phi,m_residual,residual,gap,objective_error,elapsed_seconds";
inline constexpr std::string_view kTruncatedMarker = "# truncated";

struct TraceFile {
  std::vector<std::pair<std::string, std::string>> meta;  // in file order
  std::vector<TraceRow> rows;
  bool truncated = false;

  std::optional<std::string> get(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return std::nullopt;
  }
};

namespace detail {

inline std::string field(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

inline std::optional<double> parse_field(const std::string& s, int line_no) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0') throw ContractError("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& os, const TraceFile& trace) {
  for (const auto& [k, v] : trace.meta) os << "# " << k << '=' << v << '\n';
  os << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    os << r.k << ',' << detail::field(r.phi) << ',' << detail::fmt(r.m_residual) << ',' << detail::field(r.residual)
       << ',' << detail::field(r.gap) << ',' << detail::field(r.objective_error) << ','
       << detail::fmt(r.elapsed_seconds) << '\n';
  }
  if (trace.truncated) os << kTruncatedMarker << '\n';
}

inline TraceFile read_trace_csv(std::istream& is) {
  TraceFile out;
  bool header_seen = false;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line == kTruncatedMarker) {
        out.truncated = true;
        continue;
      }
      const std::string body = detail::trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) out.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) throw ContractError("trace: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 7) throw ContractError("trace line " + std::to_string(line_no) + ": expected 7 fields");
    TraceRow r;
    const auto k = detail::parse_field(cols[0], line_no);
    const auto mres = detail::parse_field(cols[2], line_no);
    const auto el = detail::parse_field(cols[6], line_no);
    if (!k || !mres || !el) throw ContractError("trace line " + std::to_string(line_no) + ": missing required field");
    r.k = static_cast<long>(*k);
    r.phi = detail::parse_field(cols[1], line_no);
    r.m_residual = *mres;
    r.residual = detail::parse_field(cols[3], line_no);
    r.gap = detail::parse_field(cols[4], line_no);
    r.objective_error = detail::parse_field(cols[5], line_no);
    r.elapsed_seconds = *el;
    out.rows.push_back(r);
  }
  if (!header_seen) throw ContractError("trace: missing header");
  return out;
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

/// Instance, CP problem, starting point and gap evaluator of one experiment.
struct PreparedExperiment {
  Instance instance;
  CpProblem problem;
  PrimalDualPoint x0;
  GapEvaluator evaluator;
  std::optional<double> f_star;
};

inline Instance make_instance(const ExperimentConfig& cfg) {
  if (cfg.problem == ProblemKind::matrix_game) {
    return gen_matrix_game(*parse_game_variant(cfg.variant), cfg.seed, GameDims{cfg.p, cfg.q});
  }
  return gen_lasso(*parse_lasso_variant(cfg.variant), LassoDims{cfg.q, cfg.p, cfg.s}, cfg.mu, cfg.corr_v, cfg.seed);
}

/// Problem binding and initial point for an instance, with tau = sigma = 1/||K||.
inline std::pair<CpProblem, PrimalDualPoint> bind_instance(const Instance& inst) {
  if (const auto* g = std::get_if<MatrixGameInstance>(&inst)) {
    return {make_game_problem(*g), game_initial_point(*g)};
  }
  const auto& l = std::get<LassoInstance>(inst);
  return {make_lasso_problem(l), lasso_initial_point(l)};
}

inline PreparedExperiment prepare(const ExperimentConfig& cfg) {
  cfg.validate();
  Instance inst = make_instance(cfg);
  auto [prob, x0] = bind_instance(inst);
  PreparedExperiment out{inst, prob, x0, std::monostate{}, std::nullopt};
  if (const auto* g = std::get_if<MatrixGameInstance>(&inst)) {
    out.evaluator = GameGapEvaluator{g->K};
  } else {
    const auto& l = std::get<LassoInstance>(inst);
    const double f_star = cfg.fstar == "planted"
                              ? lasso_objective(l.u_star, l)
                              : lasso_objective(reference_solution(prob, x0, cfg.reference_iters).u, l);
    out.f_star = f_star;
    out.evaluator = LassoErrorEvaluator{l, f_star};
  }
  return out;
}

inline SolverConfig solver_config(const ExperimentConfig& cfg, Algorithm alg) {
  SolverConfig sc;
  sc.algorithm = alg;
  sc.max_iters = cfg.max_iters;
  if (is_restarted(alg)) sc.restart_period = cfg.restart_period;
  sc.stop_tol = cfg.stop_tol;
  sc.metric_cadence = cfg.metric_cadence;
  sc.time_limit_seconds = cfg.time_limit_seconds;
  return sc;
}

inline TraceFile to_trace_file(const ExperimentConfig& cfg, const PreparedExperiment& ex, std::string_view label,
                               const SolverConfig& sc, const IterationTrace& trace) {
  TraceFile tf;
  auto add = [&tf](std::string k, std::string v) { tf.meta.emplace_back(std::move(k), std::move(v)); };
  add("algorithm", std::string(label));
  add("solver", std::string(to_string(sc.algorithm)));
  add("problem", std::string(to_string(cfg.problem)));
  add("variant", cfg.variant);
  add("seed", std::to_string(cfg.seed));
  add("p", std::to_string(cfg.p));
  add("q", std::to_string(cfg.q));
  if (cfg.problem == ProblemKind::lasso) {
    add("s", std::to_string(cfg.s));
    add("mu", detail::fmt(cfg.mu));
    if (cfg.corr_v) add("corr_v", detail::fmt(*cfg.corr_v));
    add("f_star", detail::fmt(*ex.f_star));
    add("fstar_source", cfg.fstar);
  }
  add("tau", detail::fmt(ex.problem.tau));
  add("sigma", detail::fmt(ex.problem.sigma));
  add("norm_K", detail::fmt(ex.problem.norm_K));
  if (sc.restart_period) add("restart_period", std::to_string(*sc.restart_period));
  add("max_iters", std::to_string(sc.max_iters));
  add("metric_cadence", std::to_string(sc.metric_cadence));
  add("phi_index", "phi at row k is computed at x^k and forms x^(k+1); phi_0 = 1");
  add("metrics_at", "y^k = T(x^k)");
  add("stop", std::string(to_string(trace.stop)));
  add("iterations", std::to_string(trace.iterations));
  tf.rows = trace.rows;
  tf.truncated = trace.stop == StopReason::time_limit;
  return tf;
}

/// Runs every configured algorithm and writes <output_path>/<label>.csv.
/// Returns the written paths in algorithm order.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  const PreparedExperiment ex = prepare(cfg);
  const MetricFn metrics = make_metrics(ex.problem, ex.evaluator);
  const std::filesystem::path dir(cfg.output_path);
  std::filesystem::create_directories(dir);
  {
    std::ofstream cf(dir / "config.txt");
    cf << serialize_config(cfg);
  }

  std::vector<std::filesystem::path> written;
  for (const auto& label : cfg.algorithms) {
    const Algorithm alg = *algorithm_for_label(label);
    const SolverConfig sc = solver_config(cfg, alg);
    const CpSolver solver(ex.problem, sc);
    const IterationTrace trace = solver.run(ex.x0, metrics);
    const auto path = dir / (label + ".csv");
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    write_trace_csv(os, to_trace_file(cfg, ex, label, sc, trace));
    if (!os) throw ConfigError("write failed for '" + path.string() + "'");
    if (log) {
      const auto& last = trace.rows.back();
      *log << label << ": " << to_string(trace.stop) << " after " << trace.iterations
           << " iterations, m_residual=" << last.m_residual;
      if (last.gap) *log << ", gap=" << *last.gap;
      if (last.objective_error) *log << ", objective_error=" << *last.objective_error;
      *log << ", " << last.elapsed_seconds << " s -> " << path.string() << '\n';
    }
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Trace verification
// ---------------------------------------------------------------------------

inline constexpr double kPhiBoundSlack = 1e-9;
inline constexpr double kGapSlack = 1e-9;
inline constexpr double kRateBoundSlack = 1e-7;

struct VerifyOptions {
  long reference_iters = 100000;
};

struct VerifyReport {
  std::vector<std::string> checks;      // names of checks performed
  std::vector<std::string> violations;  // empty when everything holds
  bool ok() const { return violations.empty(); }
};

/// Re-checks trace invariants: row ordering, the phi lower bound of the
/// adaptive schemes, gap nonnegativity and, given the instance, the
/// M-residual rate bound of the unrestarted adaptive scheme against a plain
/// CP reference solution.
inline VerifyReport verify_trace(const TraceFile& tf, const Instance* instance = nullptr,
                                 const VerifyOptions& opts = {}) {
  VerifyReport rep;
  auto violate = [&rep](std::string msg) { rep.violations.push_back(std::move(msg)); };
  if (tf.rows.empty()) {
    violate("trace has no rows");
    return rep;
  }

  rep.checks.emplace_back("row order");
  for (std::size_t i = 1; i < tf.rows.size(); ++i) {
    if (tf.rows[i].k <= tf.rows[i - 1].k) violate("k not strictly increasing at row " + std::to_string(i));
    if (tf.rows[i].elapsed_seconds < tf.rows[i - 1].elapsed_seconds) {
      violate("elapsed_seconds decreases at k=" + std::to_string(tf.rows[i].k));
    }
  }

  const auto solver = tf.get("solver").value_or("");
  const auto algo = parse_algorithm(solver);
  std::optional<long> period;
  if (auto rp = tf.get("restart_period")) period = std::stol(*rp);
  auto in_epoch = [&period](long k) { return period ? k % *period : k; };

  if (algo && is_adaptive(*algo)) {
    rep.checks.emplace_back("phi lower bound");
    for (const auto& r : tf.rows) {
      if (!r.phi) {
        violate("missing phi at k=" + std::to_string(r.k));
        continue;
      }
      const double bound = static_cast<double>(in_epoch(r.k)) + 1.0;
      if (*r.phi < bound - kPhiBoundSlack) {
        violate("phi=" + detail::fmt(*r.phi) + " below " + detail::fmt(bound) + " at k=" + std::to_string(r.k));
      }
    }
  }

  rep.checks.emplace_back("gap nonnegative");
  for (const auto& r : tf.rows) {
    if (r.gap && tf.get("problem") == std::string("matrix_game") && *r.gap < -kGapSlack) {
      violate("negative gap " + detail::fmt(*r.gap) + " at k=" + std::to_string(r.k));
    }
  }

  if (instance == nullptr) return rep;

  rep.checks.emplace_back("instance metadata");
  const LinearOperator& K = std::visit([](const auto& i) -> const LinearOperator& { return i.K; }, *instance);
  const bool is_game = std::holds_alternative<MatrixGameInstance>(*instance);
  const auto seed = std::visit([](const auto& i) { return i.seed; }, *instance);
  if (tf.get("problem") != std::string(is_game ? "matrix_game" : "lasso")) violate("instance problem mismatch");
  if (tf.get("p") != std::to_string(K.rows()) || tf.get("q") != std::to_string(K.cols())) {
    violate("instance dimensions mismatch");
  }
  if (tf.get("seed") != std::to_string(seed)) violate("instance seed mismatch");
  if (!rep.ok()) return rep;

  if (algo == Algorithm::pha) {
    rep.checks.emplace_back("rate bound");
    auto [prob, x0] = bind_instance(*instance);
    if (auto t = tf.get("tau")) prob.tau = std::stod(*t);
    if (auto s = tf.get("sigma")) prob.sigma = std::stod(*s);
    if (auto n = tf.get("norm_K")) prob.norm_K = std::stod(*n);
    prob.validate();
    const CpPreconditioner M = prob.preconditioner();
    const PrimalDualPoint x_star = reference_solution(prob, x0, opts.reference_iters);
    const double radius = m_seminorm(x0 - x_star, M);
    for (std::size_t i = 0; i < tf.rows.size(); ++i) {
      const auto& cur = tf.rows[i];
      // x^k was formed with phi_{k-1}; without that row, phi_{k-1} >= k stands in for it.
      double phi_prev = static_cast<double>(cur.k);
      if (i > 0 && tf.rows[i - 1].k + 1 == cur.k && tf.rows[i - 1].phi && std::isfinite(*tf.rows[i - 1].phi)) {
        phi_prev = *tf.rows[i - 1].phi;
      }
      const double bound = 2.0 / (phi_prev + 1.0) * radius + kRateBoundSlack;
      if (cur.m_residual > bound) {
        violate("m_residual=" + detail::fmt(cur.m_residual) + " exceeds rate bound " + detail::fmt(bound) +
                " at k=" + std::to_string(cur.k));
      }
    }
  }
  return rep;
}

}  // namespace pha::bench
