#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "pha/fixpoint.hpp"

using namespace pha;
using fixture::m_sq;
using fixture::random_point;

namespace {

PrimalDualPoint point(double u, double v) { return {Vector::Constant(1, u), Vector::Constant(1, v)}; }

/// f = g^* = 0, so both prox maps are the identity and T is linear.
CpProblem linear_cp(double k, double tau, double sigma) {
  auto id = [](const Vector& y, double) { return y; };
  return CpProblem::make(id, id, LinearOperator(DenseMatrix::Constant(1, 1, k)), tau, sigma);
}

}  // namespace

TEST(PhiUpdate, FirstStepOfEpochIsOne) {
  const CpProblem cp = make_game_problem(fixture::small_game());
  const auto M = cp.preconditioner();
  const auto x0 = game_initial_point(fixture::small_game());
  EXPECT_EQ(phi_update(x0, cp_resolvent(x0, cp), x0, M), 1.0);
}

TEST(PhiUpdate, FixedPointGivesSentinel) {
  const CpPreconditioner M(LinearOperator(DenseMatrix::Constant(1, 1, 0.5)), 1.0, 1.0);
  const auto x = point(0.3, -0.2);
  EXPECT_TRUE(std::isinf(phi_update(x, x, point(1.0, 1.0), M)));
}

TEST(PhiUpdate, TwoHandIteratedStepsScalarOracle) {
  const CpProblem cp = linear_cp(0.5, 1.0, 1.0);
  const auto M = cp.preconditioner();
  const auto x0 = point(1.0, 0.0);

  // Independent scalar evaluation: T(u, v) = (u - v/2, u/2 + v/2) and
  // M = [[1, -1/2], [-1/2, 1]].
  auto T = [](double u, double v) { return std::pair{u - 0.5 * v, 0.5 * u + 0.5 * v}; };
  auto minner = [](double a1, double a2, double b1, double b2) {
    return a1 * b1 - 0.5 * a2 * b1 - 0.5 * a1 * b2 + a2 * b2;
  };
  auto [tu0, tv0] = T(1.0, 0.0);
  const double phi0 = 2.0 * minner(1.0 - tu0, 0.0 - tv0, 0.0, 0.0) / minner(1 - tu0, -tv0, 1 - tu0, -tv0) + 1.0;
  const double u1 = (1.0 + phi0 * tu0) / (phi0 + 1.0);
  const double v1 = (0.0 + phi0 * tv0) / (phi0 + 1.0);
  auto [tu1, tv1] = T(u1, v1);
  const double r1 = u1 - tu1, r2 = v1 - tv1;
  const double phi1 = 2.0 * minner(r1, r2, 1.0 - u1, 0.0 - v1) / minner(r1, r2, r1, r2) + 1.0;
  EXPECT_DOUBLE_EQ(phi1, 27.0 / 13.0);

  const double got0 = phi_update(x0, cp_resolvent(x0, cp), x0, M);
  EXPECT_EQ(got0, 1.0);
  const auto x1 = blend(x0, cp_resolvent(x0, cp), got0);
  EXPECT_NEAR(x1.u[0], u1, 1e-15);
  EXPECT_NEAR(x1.v[0], v1, 1e-15);
  const double got1 = phi_update(x1, cp_resolvent(x1, cp), x0, M);
  EXPECT_LE(std::abs(got1 - phi1), 1e-12 * phi1);
}

TEST(PhaStep, IdentityMapConverges) {
  const CpPreconditioner M(LinearOperator(DenseMatrix::Constant(1, 1, 0.5)), 1.0, 1.0);
  const auto T = FixedPointMap::identity(1, 1);
  const auto x = point(2.0, 3.0);
  const auto step = pha_step(AnchorState::start(point(0.0, 0.0)), x, T, M);
  EXPECT_TRUE(step.converged);
  EXPECT_EQ(step.x, x);
  EXPECT_TRUE(std::isinf(step.state.phi));
}

TEST(PhaStep, FirstStepIsHalfHalfBlend) {
  const auto inst = fixture::small_game(GameVariant::normal01, 3, 5, 4);
  const CpProblem cp = make_game_problem(inst);
  const CpResolvent T{cp};
  const auto x0 = game_initial_point(inst);
  const auto step = pha_step(AnchorState::start(x0), x0, T, cp.preconditioner());
  const auto Tx0 = T(x0);
  EXPECT_EQ(step.state.phi, 1.0);
  EXPECT_EQ(step.state.k_in_epoch, 1);
  EXPECT_FALSE(step.converged);
  for (Index i = 0; i < x0.u.size(); ++i) EXPECT_DOUBLE_EQ(step.x.u[i], 0.5 * x0.u[i] + 0.5 * Tx0.u[i]);
  for (Index i = 0; i < x0.v.size(); ++i) EXPECT_DOUBLE_EQ(step.x.v[i], 0.5 * x0.v[i] + 0.5 * Tx0.v[i]);
}

TEST(PhaStep, LassoToyProxChain) {
  // q = p = 1, K = [1], b = 1, mu = 0, tau = sigma = 1, anchor (0, -1):
  //   p = soft(0 - 1 * (-1), 0) = 1,  q = (1 * (2 - 0) + (-1) - 1) / 2 = 0.
  const Vector b = Vector::Ones(1);
  const CpProblem cp = CpProblem::make([](const Vector& y, double t) { return soft_threshold(y, t * 0.0); },
                                       [b](const Vector& y, double s) { return prox_gstar_lasso(y, s, b); },
                                       LinearOperator(DenseMatrix::Ones(1, 1)), 1.0, 1.0);
  const auto anchor = point(0.0, -1.0);
  const auto Tx = cp_resolvent(anchor, cp);
  EXPECT_NEAR(Tx.u[0], 1.0, 1e-12);
  EXPECT_NEAR(Tx.v[0], 0.0, 1e-12);
  const auto step = pha_step(AnchorState::start(anchor), anchor, CpResolvent{cp}, cp.preconditioner());
  EXPECT_NEAR(step.x.u[0], 0.5, 1e-12);
  EXPECT_NEAR(step.x.v[0], -0.5, 1e-12);
}

TEST(PhaStep, DimensionMismatchThrows) {
  const CpPreconditioner M(LinearOperator(DenseMatrix::Constant(1, 1, 0.5)), 1.0, 1.0);
  const auto T = FixedPointMap::identity(1, 1);
  EXPECT_THROW(pha_step(AnchorState::start(PrimalDualPoint::zeros(2, 1)), point(0, 0), T, M), DimensionError);
}

TEST(PhaStep, NonFiniteIterateThrows) {
  const CpPreconditioner M(LinearOperator(DenseMatrix::Constant(1, 1, 0.5)), 1.0, 1.0);
  const FixedPointMap T{1, 1, [](const PrimalDualPoint&) { return point(std::nan(""), 0.0); }};
  EXPECT_THROW(pha_step(AnchorState::start(point(0, 0)), point(1, 1), T, M), NumericError);
}

TEST(PicardStep, Examples) {
  const auto x = point(1.5, -2.0);
  EXPECT_EQ(picard_step(x, FixedPointMap::identity(1, 1)), x);
  const CpProblem cp = linear_cp(0.5, 1.0, 1.0);
  const auto zero = point(0.0, 0.0);
  EXPECT_EQ(picard_step(zero, CpResolvent{cp}), zero);
}

TEST(HalpernFixedStep, Schedule) {
  const CpProblem cp = linear_cp(0.5, 1.0, 1.0);
  const CpResolvent T{cp};
  const auto anchor = point(1.0, -1.0);
  const auto x = point(0.25, 0.75);
  const auto Tx = T(x);
  const auto h0 = halpern_fixed_step(0, anchor, x, T);
  EXPECT_DOUBLE_EQ(h0.u[0], 0.5 * anchor.u[0] + 0.5 * Tx.u[0]);
  EXPECT_DOUBLE_EQ(h0.v[0], 0.5 * anchor.v[0] + 0.5 * Tx.v[0]);
  const auto h9 = halpern_fixed_step(9, anchor, x, T);
  EXPECT_NEAR(h9.u[0], anchor.u[0] / 11.0 + 10.0 * Tx.u[0] / 11.0, 1e-15);
  EXPECT_NEAR(h9.v[0], anchor.v[0] / 11.0 + 10.0 * Tx.v[0] / 11.0, 1e-15);
  const auto zero = point(0.0, 0.0);
  EXPECT_EQ(halpern_fixed_step(4, zero, zero, T), zero);
  EXPECT_THROW(halpern_fixed_step(-1, anchor, x, T), ContractError);
}

TEST(Run, PicardOnIdentityHasZeroResidual) {
  const CpPreconditioner M(LinearOperator(DenseMatrix::Constant(2, 3, 0.1)), 1.0, 1.0);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::picard;
  cfg.max_iters = 25;
  Rng rng(1);
  const auto x0 = random_point(rng, 3, 2);
  const auto trace = run(FixedPointMap::identity(3, 2), M, x0, cfg);
  ASSERT_EQ(trace.rows.size(), 26u);
  for (const auto& r : trace.rows) {
    EXPECT_EQ(r.m_residual, 0.0);
    EXPECT_FALSE(r.phi);
  }
  EXPECT_EQ(trace.final_x, x0);
  EXPECT_EQ(trace.stop, StopReason::max_iters);
}

TEST(Run, RestartedMatchesPlainBeforeFirstRestart) {
  const auto inst = fixture::small_game();
  const CpProblem cp = make_game_problem(inst);
  const auto x0 = game_initial_point(inst);
  const long R = 60;
  SolverConfig cfg;
  cfg.max_iters = 200;
  const auto plain = build_acp(cp, cfg).run(x0);
  const auto restarted = build_restarted_acp(cp, R, cfg).run(x0);
  for (long k = 0; k < R; ++k) {
    const auto& a = plain.rows[static_cast<std::size_t>(k)];
    const auto& b = restarted.rows[static_cast<std::size_t>(k)];
    ASSERT_EQ(a.k, b.k);
    EXPECT_EQ(a.phi, b.phi);
    EXPECT_EQ(a.m_residual, b.m_residual);
  }
}

TEST(Run, RestartResetsPhiOnGameVariantOne) {
  const auto inst = fixture::small_game();
  const CpProblem cp = make_game_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 1400;
  const auto trace = build_restarted_acp(cp, 450, cfg).run(game_initial_point(inst));
  ASSERT_EQ(trace.stop, StopReason::max_iters);
  for (const auto& r : trace.rows) {
    ASSERT_TRUE(r.phi);
    if (r.k % 450 == 0) {
      EXPECT_EQ(*r.phi, 1.0) << "k=" << r.k;
    } else {
      EXPECT_GE(*r.phi, static_cast<double>(r.k % 450) + 1.0 - 1e-9) << "k=" << r.k;
    }
  }
}

TEST(Run, HalpernRecordsScheduleAndRestartedHalpernResets) {
  const auto inst = fixture::small_game(GameVariant::normal01, 4, 6, 5);
  const CpProblem cp = make_game_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 30;
  const auto h = build_restarted_hcp(cp, 10, cfg).run(game_initial_point(inst));
  for (const auto& r : h.rows) EXPECT_EQ(*r.phi, static_cast<double>(r.k % 10) + 1.0);
}

TEST(Run, TraceBookkeeping) {
  const auto inst = fixture::small_game();
  const CpProblem cp = make_game_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 95;
  cfg.metric_cadence = 10;
  const auto trace = build_hcp(cp, cfg).run(game_initial_point(inst));
  ASSERT_EQ(trace.rows.size(), 11u);
  EXPECT_EQ(trace.rows.back().k, 95);
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    EXPECT_GT(trace.rows[i].k, trace.rows[i - 1].k);
    EXPECT_GE(trace.rows[i].elapsed_seconds, trace.rows[i - 1].elapsed_seconds);
  }
}

TEST(Run, StopsOnTolerance) {
  const auto inst = fixture::small_game();
  const CpProblem cp = make_game_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.stop_tol = 1e-4;
  cfg.metric_cadence = 1000;
  const auto trace = build_acp(cp, cfg).run(game_initial_point(inst));
  EXPECT_EQ(trace.stop, StopReason::tolerance);
  EXPECT_LE(trace.rows.back().m_residual, 1e-4);
  EXPECT_LT(trace.iterations, 20000);
}

TEST(Run, StopsOnTimeLimit) {
  const auto inst = fixture::small_game();
  const CpProblem cp = make_game_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 1000000000;
  cfg.time_limit_seconds = 0.0;
  const auto trace = build_cp(cp, cfg).run(game_initial_point(inst));
  EXPECT_EQ(trace.stop, StopReason::time_limit);
}

TEST(Run, DeterministicTraces) {
  const auto inst = fixture::small_lasso();
  const CpProblem cp = make_lasso_problem(inst);
  SolverConfig cfg;
  cfg.max_iters = 300;
  const auto x0 = lasso_initial_point(inst);
  const auto a = build_restarted_acp(cp, 100, cfg).run(x0);
  const auto b = build_restarted_acp(cp, 100, cfg).run(x0);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].phi, b.rows[i].phi);
    EXPECT_EQ(a.rows[i].m_residual, b.rows[i].m_residual);
  }
  EXPECT_EQ(a.final_x, b.final_x);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.algorithm = Algorithm::restarted_pha;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg.restart_period = 0;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg.restart_period = 5;
  EXPECT_NO_THROW(cfg.validate());
  cfg.algorithm = Algorithm::pha;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = SolverConfig{};
  cfg.max_iters = -1;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = SolverConfig{};
  cfg.metric_cadence = 0;
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = SolverConfig{};
  cfg.stop_tol = -1.0;
  EXPECT_THROW(cfg.validate(), ContractError);
}

TEST(Algorithm, NamesRoundTrip) {
  for (auto a : {Algorithm::picard, Algorithm::halpern_fixed, Algorithm::pha, Algorithm::restarted_pha,
                 Algorithm::restarted_halpern}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_FALSE(parse_algorithm("newton"));
}

// ---------------------------------------------------------------------------
// Properties over the CP resolvent of random small instances
// ---------------------------------------------------------------------------

namespace {

std::vector<std::pair<CpProblem, PrimalDualPoint>> property_instances() {
  std::vector<std::pair<CpProblem, PrimalDualPoint>> out;
  for (auto v : {GameVariant::uniform_pm1, GameVariant::normal01, GameVariant::normal0_10,
                 GameVariant::sparse_uniform}) {
    const auto inst = fixture::small_game(v, 7, 12, 9);
    out.emplace_back(make_game_problem(inst), game_initial_point(inst));
  }
  const auto lasso = fixture::small_lasso(9, LassoVariant::gaussian, 40, 20, 4);
  out.emplace_back(make_lasso_problem(lasso), lasso_initial_point(lasso));
  return out;
}

}  // namespace

TEST(FixpointProperties, PhiLowerBoundDescentAndFejer) {
  for (const auto& [cp, x0] : property_instances()) {
    const CpResolvent T{cp};
    const auto M = cp.preconditioner();
    const PrimalDualPoint p = reference_solution(cp, x0, 100000);
    const double radius = std::sqrt(std::max(0.0, m_sq(x0 - p, M)));
    AnchorState state = AnchorState::start(x0);
    PrimalDualPoint x = x0;
    double prev_phi = 0.0;
    for (long k = 0; k < 300; ++k) {
      const auto Tx = T(x);
      const auto r = x - Tx;
      const double r_sq = m_sq(r, M);
      const auto step = pha_step(state, x, T, M);
      if (step.converged) break;
      EXPECT_GE(step.state.phi, static_cast<double>(k) + 1.0 - 1e-9) << "k=" << k;
      if (k >= 1) {
        EXPECT_LE(r_sq, 2.0 / prev_phi * m_inner(r, x0 - x, M) + 1e-9) << "k=" << k;
      }
      EXPECT_LE(std::sqrt(std::max(0.0, m_sq(x - p, M))), radius + 1e-7) << "k=" << k;
      prev_phi = step.state.phi;
      state = step.state;
      x = step.x;
    }
  }
}

TEST(FixpointProperties, MFirmNonexpansiveness) {
  Rng rng(77);
  for (const auto& [cp, x0] : property_instances()) {
    const CpResolvent T{cp};
    const auto M = cp.preconditioner();
    for (int i = 0; i < 100; ++i) {
      const auto x = random_point(rng, cp);
      const auto y = random_point(rng, cp);
      const auto Tx = T(x);
      const auto Ty = T(y);
      const double lhs = m_sq(Tx - Ty, M) + m_sq((x - Tx) - (y - Ty), M);
      EXPECT_LE(lhs, m_sq(x - y, M) + 1e-9);
    }
  }
}

TEST(FixpointProperties, RateBoundAgainstReferenceSolution) {
  for (const auto& [cp, x0] : property_instances()) {
    const auto M = cp.preconditioner();
    const PrimalDualPoint p = reference_solution(cp, x0, 100000);
    const double radius = m_seminorm(x0 - p, M);
    SolverConfig cfg;
    cfg.max_iters = 2000;
    const auto trace = build_acp(cp, cfg).run(x0);
    double prev_phi = 0.0;
    for (const auto& r : trace.rows) {
      EXPECT_LE(r.m_residual, 2.0 / (prev_phi + 1.0) * radius + 1e-7) << "k=" << r.k;
      prev_phi = *r.phi;
    }
  }
}
