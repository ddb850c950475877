#pragma once

// Small instances and random states shared by the unit tests.

#include "oracles.hpp"
#include "pha/cpsolver.hpp"

namespace fixture {

using namespace pha;

inline MatrixGameInstance small_game(GameVariant v = GameVariant::uniform_pm1, std::uint64_t seed = 50,
                                     Index p = 20, Index q = 20) {
  return gen_matrix_game(v, seed, GameDims{p, q});
}

inline LassoInstance small_lasso(std::uint64_t seed = 100, LassoVariant v = LassoVariant::gaussian,
                                 Index q = 200, Index p = 100, Index s = 10) {
  return gen_lasso(v, LassoDims{q, p, s}, kLassoDefaultMu,
                   v == LassoVariant::correlated ? std::optional<double>(kLassoDefaultCorrelation) : std::nullopt,
                   seed);
}

inline PrimalDualPoint random_point(Rng& rng, Index q, Index p, double scale = 1.0) {
  return {oracle::random_vector(rng, q, scale), oracle::random_vector(rng, p, scale)};
}

inline PrimalDualPoint random_point(Rng& rng, const CpProblem& prob, double scale = 1.0) {
  return random_point(rng, prob.K.cols(), prob.K.rows(), scale);
}

/// Squared M-seminorm without the clamp, for inequality checks.
inline double m_sq(const PrimalDualPoint& x, const CpPreconditioner& M) { return m_inner(x, x, M); }

}  // namespace fixture
