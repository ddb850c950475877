#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <variant>

#include "pha/fixpoint.hpp"
#include "pha/precond.hpp"
#include "pha/problems.hpp"

namespace pha {

/// prox of (t * h) evaluated at a point, for a closed convex h.
using ProxFn = std::function<Vector(const Vector&, double)>;

/// Data of min_u f(u) + g(K u) in saddle form L(u, v) = f(u) + <K u, v> - g^*(v),
/// with the CP step sizes. Construct through make().
struct CpProblem {
  ProxFn prox_f;
  ProxFn prox_gstar;
  LinearOperator K;
  double tau = 0.0;
  double sigma = 0.0;
  double norm_K = 0.0;

  /// Estimates ||K||; tau and sigma default to 1/||K||.
  static CpProblem make(ProxFn prox_f, ProxFn prox_gstar, LinearOperator K,
                        std::optional<double> tau = std::nullopt,
                        std::optional<double> sigma = std::nullopt) {
    const auto est = operator_norm(K);
    if (!est.converged) throw NumericError("CpProblem: ||K|| estimate did not converge");
    CpProblem prob{std::move(prox_f), std::move(prox_gstar), std::move(K), 0.0, 0.0, est.value};
    const double inv = est.value > 0.0 ? 1.0 / est.value : 1.0;
    prob.tau = tau.value_or(inv);
    prob.sigma = sigma.value_or(inv);
    prob.validate();
    return prob;
  }

  void validate() const {
    if (!prox_f || !prox_gstar) throw ContractError("CpProblem: missing prox");
    if (!(tau > 0.0) || !(sigma > 0.0)) throw ContractError("CpProblem: tau, sigma must be > 0");
    if (tau * sigma * norm_K * norm_K > 1.0 + CpPreconditioner::kAdmissibilitySlack) {
      throw ContractError("CpProblem: step sizes violate tau*sigma*||K||^2 <= 1");
    }
  }

  CpPreconditioner preconditioner() const { return CpPreconditioner(K, tau, sigma, norm_K); }
};

/// (M + A)^{-1} M for the CP pair, i.e. one Chambolle-Pock sweep:
///   p = prox_{tau f}(u - tau K^T v)
///   q = prox_{sigma g^*}(sigma K (2p - u) + v)
inline PrimalDualPoint cp_resolvent(const PrimalDualPoint& x, const CpProblem& prob) {
  detail::require_same_size(x.u.size(), prob.K.cols(), "cp_resolvent primal");
  detail::require_same_size(x.v.size(), prob.K.rows(), "cp_resolvent dual");
  PrimalDualPoint y;
  y.u = prob.prox_f(x.u - prob.tau * prob.K.adjoint_apply(x.v), prob.tau);
  y.v = prob.prox_gstar(prob.sigma * prob.K.apply(2.0 * y.u - x.u) + x.v, prob.sigma);
  return y;
}

/// cp_resolvent as a FixedPointMapLike object.
struct CpResolvent {
  CpProblem problem;
  PrimalDualPoint operator()(const PrimalDualPoint& x) const { return cp_resolvent(x, problem); }
};

/// R(x) = (u - prox_f(u - K^T v), v - prox_{g^*}(v + K u)).
///
/// Both prox maps use parameter 1 here, not tau and sigma.
inline PrimalDualPoint residual_map(const PrimalDualPoint& x, const CpProblem& prob) {
  detail::require_same_size(x.u.size(), prob.K.cols(), "residual_map primal");
  detail::require_same_size(x.v.size(), prob.K.rows(), "residual_map dual");
  return {x.u - prob.prox_f(x.u - prob.K.adjoint_apply(x.v), 1.0),
          x.v - prob.prox_gstar(x.v + prob.K.apply(x.u), 1.0)};
}

// ---------------------------------------------------------------------------
// Problem bindings
// ---------------------------------------------------------------------------

/// f = indicator of the simplex in R^q, g^* = indicator of the simplex in R^p.
inline CpProblem make_game_problem(const MatrixGameInstance& inst, std::optional<double> tau = std::nullopt,
                                   std::optional<double> sigma = std::nullopt) {
  auto proj = [](const Vector& y, double) { return project_simplex(y); };
  return CpProblem::make(proj, proj, inst.K, tau, sigma);
}

/// f = mu ||.||_1, g = 1/2 ||. - b||^2.
inline CpProblem make_lasso_problem(const LassoInstance& inst, std::optional<double> tau = std::nullopt,
                                    std::optional<double> sigma = std::nullopt) {
  const double mu = inst.mu;
  const Vector b = inst.b;
  return CpProblem::make([mu](const Vector& y, double t) { return soft_threshold(y, t * mu); },
                         [b](const Vector& y, double s) { return prox_gstar_lasso(y, s, b); }, inst.K, tau,
                         sigma);
}

/// Uniform strategies on both simplices.
inline PrimalDualPoint game_initial_point(const MatrixGameInstance& inst) {
  const Index p = inst.K.rows();
  const Index q = inst.K.cols();
  return {Vector::Constant(q, 1.0 / static_cast<double>(q)), Vector::Constant(p, 1.0 / static_cast<double>(p))};
}

/// u = 0, v = -b.
inline PrimalDualPoint lasso_initial_point(const LassoInstance& inst) {
  return {Vector::Zero(inst.K.cols()), -inst.b};
}

// ---------------------------------------------------------------------------
// Gap
// ---------------------------------------------------------------------------

struct GameGapEvaluator {
  LinearOperator K;
};

/// F(u) - F^* for a LASSO instance with a known reference optimum.
struct LassoErrorEvaluator {
  LassoInstance instance;
  double f_star = 0.0;
};

using GapEvaluator = std::variant<std::monostate, GameGapEvaluator, LassoErrorEvaluator>;

/// Problem-specific primal-dual gap at (p, q): the game duality gap, or the
/// objective error F(p) - F^* for LASSO.
inline double pd_gap(const Vector& p, const Vector& q, const GapEvaluator& eval) {
  return std::visit(
      [&](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, GameGapEvaluator>) {
          return game_gap(p, q, e.K);
        } else if constexpr (std::is_same_v<E, LassoErrorEvaluator>) {
          return lasso_objective(p, e.instance) - e.f_star;
        } else {
          throw ContractError("pd_gap: no gap evaluator for this problem");
        }
      },
      eval);
}

/// Metrics at y^k: residual ||R(y^k)||, plus the game gap or LASSO objective error.
inline MetricFn make_metrics(const CpProblem& prob, GapEvaluator eval) {
  return [prob, eval = std::move(eval)](long, const PrimalDualPoint&, const PrimalDualPoint& y) {
    MetricValues mv;
    mv.residual = residual_map(y, prob).norm();
    if (std::holds_alternative<GameGapEvaluator>(eval)) {
      mv.gap = pd_gap(y.u, y.v, eval);
    } else if (std::holds_alternative<LassoErrorEvaluator>(eval)) {
      mv.objective_error = pd_gap(y.u, y.v, eval);
    }
    return mv;
  };
}

// ---------------------------------------------------------------------------
// Solver assemblies
// ---------------------------------------------------------------------------

/// A fixed-point engine bound to the CP resolvent and its preconditioner.
class CpSolver {
 public:
  CpSolver(CpProblem prob, SolverConfig cfg)
      : map_{std::move(prob)}, M_(map_.problem.preconditioner()), cfg_(std::move(cfg)) {
    map_.problem.validate();
    cfg_.validate();
  }

  IterationTrace run(const PrimalDualPoint& x0, const MetricFn& metrics = {}) const {
    return pha::run(map_, M_, x0, cfg_, metrics);
  }

  const CpProblem& problem() const { return map_.problem; }
  const CpResolvent& map() const { return map_; }
  const CpPreconditioner& preconditioner() const { return M_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  CpResolvent map_;
  CpPreconditioner M_;
  SolverConfig cfg_;
};

namespace detail {
inline CpSolver assemble(CpProblem prob, SolverConfig cfg, Algorithm a, std::optional<long> period) {
  cfg.algorithm = a;
  cfg.restart_period = period;
  return CpSolver(std::move(prob), std::move(cfg));
}
}  // namespace detail

/// Accelerated CP: PHA driven by the CP resolvent.
inline CpSolver build_acp(CpProblem prob, SolverConfig cfg = {}) {
  return detail::assemble(std::move(prob), std::move(cfg), Algorithm::pha, std::nullopt);
}
inline CpSolver build_restarted_acp(CpProblem prob, long restart_period, SolverConfig cfg = {}) {
  return detail::assemble(std::move(prob), std::move(cfg), Algorithm::restarted_pha, restart_period);
}
/// Halpern CP with anchor weight 1/(k+2).
inline CpSolver build_hcp(CpProblem prob, SolverConfig cfg = {}) {
  return detail::assemble(std::move(prob), std::move(cfg), Algorithm::halpern_fixed, std::nullopt);
}
inline CpSolver build_restarted_hcp(CpProblem prob, long restart_period, SolverConfig cfg = {}) {
  return detail::assemble(std::move(prob), std::move(cfg), Algorithm::restarted_halpern, restart_period);
}
/// Plain CP (Picard iteration of the resolvent).
inline CpSolver build_cp(CpProblem prob, SolverConfig cfg = {}) {
  return detail::assemble(std::move(prob), std::move(cfg), Algorithm::picard, std::nullopt);
}

/// Long plain-CP run used as a stand-in for an exact solution.
inline PrimalDualPoint reference_solution(const CpProblem& prob, const PrimalDualPoint& x0, long iters) {
  SolverConfig cfg;
  cfg.max_iters = iters;
  cfg.metric_cadence = iters > 0 ? iters : 1;
  return build_cp(prob, cfg).run(x0).final_y;
}

}  // namespace pha
