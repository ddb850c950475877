#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pha/precond.hpp"

namespace pha {

// Fixed-point engines for a map T with an M-geometry: Picard, Halpern with
// the classical 1/(k+2) schedule, Halpern with adaptive anchoring (PHA), and
// restarted wrappers of the two anchored schemes.
//
// Indexing used throughout (traces included): x^0 is the anchor, y^k = T x^k,
// and phi_k is evaluated at (x^k, y^k) and used to form
//
//     x^{k+1} = x^0 / (phi_k + 1) + phi_k / (phi_k + 1) * y^k.
//
// So phi_0 = 1, and phi_k >= k + 1 in exact arithmetic. The first step of
// every epoch takes phi = 1 directly (its numerator is exactly zero); the
// stationarity sentinel applies from the second step on.

template <class Map>
concept FixedPointMapLike = requires(const Map& t, const PrimalDualPoint& x) {
  { t(x) } -> std::convertible_to<PrimalDualPoint>;
};

/// Type-erased fixed-point map.
struct FixedPointMap {
  Index dim_u = 0;
  Index dim_v = 0;
  std::function<PrimalDualPoint(const PrimalDualPoint&)> eval;

  PrimalDualPoint operator()(const PrimalDualPoint& x) const {
    detail::require_same_size(x.u.size(), dim_u, "FixedPointMap primal");
    detail::require_same_size(x.v.size(), dim_v, "FixedPointMap dual");
    return eval(x);
  }

  static FixedPointMap identity(Index dim_u, Index dim_v) {
    return {dim_u, dim_v, [](const PrimalDualPoint& x) { return x; }};
  }
};

/// Squared M-seminorm of x - Tx at or below which x is declared M-stationary.
inline constexpr double kPhiDenominatorEps = 1e-24;

struct AnchorState {
  PrimalDualPoint anchor;
  double phi = 0.0;
  long k_in_epoch = 0;

  static AnchorState start(PrimalDualPoint x0) { return {std::move(x0), 0.0, 0}; }
};

namespace detail {

struct PhiEvaluation {
  double phi;
  double residual_sq;  // ||x - Tx||_M^2 as computed, possibly slightly negative
};

inline PhiEvaluation evaluate_phi(const PrimalDualPoint& x, const PrimalDualPoint& Tx,
                                  const PrimalDualPoint& anchor, const CpPreconditioner& M,
                                  double eps_den, bool first_step) {
  const PrimalDualPoint r = x - Tx;
  const Vector Kr = M.K().apply(r.u);
  const double den = m_inner(r, Kr, r, Kr, M);
  if (first_step) return {1.0, den};
  if (den <= eps_den) return {std::numeric_limits<double>::infinity(), den};
  const PrimalDualPoint d = anchor - x;
  const Vector Kd = M.K().apply(d.u);
  const double num = m_inner(r, Kr, d, Kd, M);
  // Clipped at 1 so rounding can never push the anchor weight above 1/2.
  return {std::max(1.0, 2.0 * num / den + 1.0), den};
}

inline void require_finite(const PrimalDualPoint& x, const char* where) {
  if (!x.all_finite()) throw NumericError(std::string(where) + ": non-finite iterate");
}

}  // namespace detail

/// Adaptive anchoring parameter
///
///     phi = 2 <x - Tx, anchor - x>_M / ||x - Tx||_M^2 + 1,
///
/// or +infinity when ||x - Tx||_M^2 <= eps_den (x is then M-stationary and
/// Tx is a fixed point of T). When x_prev equals the anchor the result is 1.
inline double phi_update(const PrimalDualPoint& x_prev, const PrimalDualPoint& Tx_prev,
                         const PrimalDualPoint& anchor, const CpPreconditioner& M,
                         double eps_den = kPhiDenominatorEps) {
  detail::require_compatible(x_prev, M);
  detail::require_compatible(Tx_prev, M);
  detail::require_compatible(anchor, M);
  const bool first_step = x_prev == anchor;
  return detail::evaluate_phi(x_prev, Tx_prev, anchor, M, eps_den, first_step).phi;
}

/// anchor / (phi + 1) + phi / (phi + 1) * Tx; an infinite phi returns Tx.
inline PrimalDualPoint blend(const PrimalDualPoint& anchor, const PrimalDualPoint& Tx, double phi) {
  if (std::isinf(phi)) return Tx;
  const double wa = 1.0 / (phi + 1.0);
  const double wt = phi / (phi + 1.0);
  return {wa * anchor.u + wt * Tx.u, wa * anchor.v + wt * Tx.v};
}

struct PhaStep {
  PrimalDualPoint x;
  AnchorState state;
  bool converged = false;
};

/// One PHA update from x_prev: evaluates T once, computes phi against the
/// state's anchor and blends.
template <FixedPointMapLike Map>
PhaStep pha_step(const AnchorState& state, const PrimalDualPoint& x_prev, const Map& T,
                 const CpPreconditioner& M) {
  detail::require_compatible(state.anchor, M);
  detail::require_compatible(x_prev, M);
  PrimalDualPoint Tx = T(x_prev);
  detail::require_finite(Tx, "pha_step");
  const double phi =
      detail::evaluate_phi(x_prev, Tx, state.anchor, M, kPhiDenominatorEps,
                           state.k_in_epoch == 0 && x_prev == state.anchor)
          .phi;
  PhaStep out{blend(state.anchor, Tx, phi), state, std::isinf(phi)};
  out.state.phi = phi;
  out.state.k_in_epoch = state.k_in_epoch + 1;
  detail::require_finite(out.x, "pha_step");
  return out;
}

/// Degenerate preconditioned proximal point step: T(x).
template <FixedPointMapLike Map>
PrimalDualPoint picard_step(const PrimalDualPoint& x, const Map& T) {
  PrimalDualPoint y = T(x);
  detail::require_finite(y, "picard_step");
  return y;
}

/// Halpern step with weight 1/(k+2) on the anchor, k >= 0.
template <FixedPointMapLike Map>
PrimalDualPoint halpern_fixed_step(long k, const PrimalDualPoint& anchor, const PrimalDualPoint& x_prev,
                                   const Map& T) {
  if (k < 0) throw ContractError("halpern_fixed_step: k must be >= 0");
  PrimalDualPoint y = blend(anchor, T(x_prev), static_cast<double>(k) + 1.0);
  detail::require_finite(y, "halpern_fixed_step");
  return y;
}

enum class Algorithm { picard, halpern_fixed, pha, restarted_pha, restarted_halpern };

inline constexpr std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::picard: return "picard";
    case Algorithm::halpern_fixed: return "halpern_fixed";
    case Algorithm::pha: return "pha";
    case Algorithm::restarted_pha: return "restarted_pha";
    case Algorithm::restarted_halpern: return "restarted_halpern";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::picard, Algorithm::halpern_fixed, Algorithm::pha, Algorithm::restarted_pha,
                 Algorithm::restarted_halpern}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

inline constexpr bool is_restarted(Algorithm a) {
  return a == Algorithm::restarted_pha || a == Algorithm::restarted_halpern;
}
inline constexpr bool is_adaptive(Algorithm a) {
  return a == Algorithm::pha || a == Algorithm::restarted_pha;
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::pha;
  long max_iters = 1000;
  std::optional<long> restart_period;
  double stop_tol = 0.0;  // on ||x - Tx||_M; 0 disables
  long metric_cadence = 1;
  std::optional<double> time_limit_seconds;
  /// Replaces the anchoring parameter of the anchored schemes; called with
  /// the in-epoch index. Used to pin schedules in tests.
  std::function<double(long)> phi_override;

  void validate() const {
    if (max_iters < 0) throw ContractError("SolverConfig: max_iters must be >= 0");
    if (metric_cadence < 1) throw ContractError("SolverConfig: metric_cadence must be >= 1");
    if (is_restarted(algorithm) != restart_period.has_value()) {
      throw ContractError("SolverConfig: restart_period must be set exactly for restarted algorithms");
    }
    if (restart_period && *restart_period < 1) throw ContractError("SolverConfig: restart_period must be >= 1");
    if (!(stop_tol >= 0.0)) throw ContractError("SolverConfig: stop_tol must be >= 0");
  }
};

/// Problem-specific quantities evaluated at recorded iterations.
struct MetricValues {
  std::optional<double> residual;
  std::optional<double> gap;
  std::optional<double> objective_error;
};

/// Called with (k, x^k, y^k = T x^k) at each recorded iteration.
using MetricFn = std::function<MetricValues(long, const PrimalDualPoint&, const PrimalDualPoint&)>;

struct TraceRow {
  long k = 0;
  std::optional<double> phi;
  double m_residual = 0.0;
  std::optional<double> residual;
  std::optional<double> gap;
  std::optional<double> objective_error;
  double elapsed_seconds = 0.0;
};

enum class StopReason { max_iters, tolerance, fixed_point, time_limit };

inline constexpr std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::tolerance: return "tolerance";
    case StopReason::fixed_point: return "fixed_point";
    case StopReason::time_limit: return "time_limit";
  }
  return "?";
}

struct IterationTrace {
  std::vector<TraceRow> rows;
  StopReason stop = StopReason::max_iters;
  long iterations = 0;  // index of the last iterate
  PrimalDualPoint final_x;
  PrimalDualPoint final_y;
};

/// Runs the configured scheme from x0 for up to cfg.max_iters updates.
///
/// Row k of the trace describes x^k: its M-residual ||x^k - y^k||_M, the
/// anchoring parameter phi_k computed at x^k (absent for Picard), and the
/// metrics at (x^k, y^k). Rows are written every cfg.metric_cadence
/// iterations and for the final iterate. For restarted schemes the anchor is
/// reset to x^k whenever k is a positive multiple of the restart period, so
/// the recorded phi is back at 1 on those rows. elapsed_seconds accumulates
/// the time spent in map evaluations and updates only.
template <FixedPointMapLike Map>
IterationTrace run(const Map& T, const CpPreconditioner& M, const PrimalDualPoint& x0,
                   const SolverConfig& cfg, const MetricFn& metrics = {}) {
  cfg.validate();
  detail::require_compatible(x0, M);
  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();

  IterationTrace trace;
  double elapsed = 0.0;
  auto timed = [&elapsed](auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    elapsed += std::chrono::duration<double>(Clock::now() - t0).count();
  };

  PrimalDualPoint x = x0;
  PrimalDualPoint anchor = x0;
  PrimalDualPoint y;
  timed([&] { y = T(x); });
  detail::require_finite(y, "run");
  long in_epoch = 0;

  for (long k = 0;; ++k) {
    if (is_restarted(cfg.algorithm) && k > 0 && k % *cfg.restart_period == 0) {
      anchor = x;
      in_epoch = 0;
    }

    std::optional<double> phi;
    double residual_sq = 0.0;
    switch (cfg.algorithm) {
      case Algorithm::pha:
      case Algorithm::restarted_pha: {
        detail::PhiEvaluation ev{};
        timed([&] { ev = detail::evaluate_phi(x, y, anchor, M, kPhiDenominatorEps, in_epoch == 0); });
        phi = ev.phi;
        residual_sq = ev.residual_sq;
        break;
      }
      case Algorithm::halpern_fixed:
      case Algorithm::restarted_halpern:
        phi = static_cast<double>(in_epoch) + 1.0;
        [[fallthrough]];
      case Algorithm::picard: {
        const PrimalDualPoint r = x - y;
        const Vector Kr = M.K().apply(r.u);
        residual_sq = detail::m_inner(r, Kr, r, Kr, M);
        break;
      }
    }
    if (cfg.phi_override && cfg.algorithm != Algorithm::picard) phi = cfg.phi_override(in_epoch);
    const double m_residual =
        seminorm_from_quadratic(residual_sq, (x - y).squared_norm());

    std::optional<StopReason> stop;
    if (phi && std::isinf(*phi)) {
      stop = StopReason::fixed_point;
    } else if (cfg.stop_tol > 0.0 && m_residual <= cfg.stop_tol) {
      stop = StopReason::tolerance;
    } else if (k >= cfg.max_iters) {
      stop = StopReason::max_iters;
    } else if (cfg.time_limit_seconds &&
               std::chrono::duration<double>(Clock::now() - wall_start).count() > *cfg.time_limit_seconds) {
      stop = StopReason::time_limit;
    }

    if (stop || k % cfg.metric_cadence == 0) {
      TraceRow row;
      row.k = k;
      row.phi = phi;
      row.m_residual = m_residual;
      row.elapsed_seconds = elapsed;
      if (metrics) {
        const MetricValues mv = metrics(k, x, y);
        row.residual = mv.residual;
        row.gap = mv.gap;
        row.objective_error = mv.objective_error;
      }
      trace.rows.push_back(row);
    }

    if (stop) {
      trace.stop = *stop;
      trace.iterations = k;
      trace.final_x = std::move(x);
      trace.final_y = std::move(y);
      return trace;
    }

    timed([&] {
      x = phi ? blend(anchor, y, *phi) : y;
      y = T(x);
    });
    detail::require_finite(x, "run");
    detail::require_finite(y, "run");
    ++in_epoch;
  }
}

}  // namespace pha
