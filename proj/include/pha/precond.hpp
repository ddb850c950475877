#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "pha/linops.hpp"

namespace pha {

/// Joint iterate x = (u, v): primal u in R^q, dual v in R^p.
struct PrimalDualPoint {
  Vector u;
  Vector v;

  static PrimalDualPoint zeros(Index q, Index p) { return {Vector::Zero(q), Vector::Zero(p)}; }

  double squared_norm() const { return u.squaredNorm() + v.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
  bool all_finite() const { return u.allFinite() && v.allFinite(); }

  friend bool operator==(const PrimalDualPoint& a, const PrimalDualPoint& b) {
    return a.u.size() == b.u.size() && a.v.size() == b.v.size() && a.u == b.u && a.v == b.v;
  }
};

inline PrimalDualPoint operator-(const PrimalDualPoint& a, const PrimalDualPoint& b) {
  detail::require_same_size(a.u.size(), b.u.size(), "PrimalDualPoint -");
  detail::require_same_size(a.v.size(), b.v.size(), "PrimalDualPoint -");
  return {a.u - b.u, a.v - b.v};
}

inline PrimalDualPoint operator+(const PrimalDualPoint& a, const PrimalDualPoint& b) {
  detail::require_same_size(a.u.size(), b.u.size(), "PrimalDualPoint +");
  detail::require_same_size(a.v.size(), b.v.size(), "PrimalDualPoint +");
  return {a.u + b.u, a.v + b.v};
}

inline PrimalDualPoint operator*(double c, const PrimalDualPoint& a) { return {c * a.u, c * a.v}; }

/// The Chambolle-Pock preconditioner
///
///     M = [ I/tau   -K^T  ]
///         [ -K      I/sigma ]
///
/// which is positive semidefinite exactly when tau * sigma * ||K||^2 <= 1.
/// The constructor enforces that condition (with 1e-12 slack) against the
/// supplied or estimated operator norm.
class CpPreconditioner {
 public:
  static constexpr double kAdmissibilitySlack = 1e-12;

  CpPreconditioner(LinearOperator K, double tau, double sigma, double norm_K)
      : K_(std::move(K)), tau_(tau), sigma_(sigma), norm_K_(norm_K) {
    if (!(tau_ > 0.0) || !(sigma_ > 0.0)) throw ContractError("CpPreconditioner: tau, sigma must be > 0");
    if (!(norm_K_ >= 0.0)) throw ContractError("CpPreconditioner: norm_K must be >= 0");
    if (tau_ * sigma_ * norm_K_ * norm_K_ > 1.0 + kAdmissibilitySlack) {
      throw ContractError("CpPreconditioner: tau*sigma*||K||^2 = " +
                          std::to_string(tau_ * sigma_ * norm_K_ * norm_K_) + " exceeds 1");
    }
  }

  /// Estimates ||K|| by power iteration.
  CpPreconditioner(LinearOperator K, double tau, double sigma)
      : CpPreconditioner(K, tau, sigma, operator_norm(K).value) {}

  const LinearOperator& K() const { return K_; }
  double tau() const { return tau_; }
  double sigma() const { return sigma_; }
  double norm_K() const { return norm_K_; }
  Index dim_u() const { return K_.cols(); }
  Index dim_v() const { return K_.rows(); }

 private:
  LinearOperator K_;
  double tau_;
  double sigma_;
  double norm_K_;
};

namespace detail {

inline void require_compatible(const PrimalDualPoint& x, const CpPreconditioner& M) {
  require_same_size(x.u.size(), M.dim_u(), "primal dimension");
  require_same_size(x.v.size(), M.dim_v(), "dual dimension");
}

/// <x, y>_M given the products K x.u and K y.u.
inline double m_inner(const PrimalDualPoint& x, const Vector& Kux, const PrimalDualPoint& y,
                      const Vector& Kuy, const CpPreconditioner& M) {
  return x.u.dot(y.u) / M.tau() - Kux.dot(y.v) - Kuy.dot(x.v) + x.v.dot(y.v) / M.sigma();
}

}  // namespace detail

inline double m_inner(const PrimalDualPoint& x, const PrimalDualPoint& y, const CpPreconditioner& M) {
  detail::require_compatible(x, M);
  detail::require_compatible(y, M);
  return detail::m_inner(x, M.K().apply(x.u), y, M.K().apply(y.u), M);
}

/// Relative threshold below which a negative quadratic form is treated as
/// rounding noise and clamped to zero.
inline constexpr double kSeminormClampTol = 1e-9;

/// sqrt of a computed <x, x>_M, clamping rounding noise; `euclid_sq` is ||x||^2.
inline double seminorm_from_quadratic(double q, double euclid_sq) {
  if (q < 0.0) {
    if (q < -kSeminormClampTol * euclid_sq) {
      throw NumericError("M-quadratic form is materially negative (" + std::to_string(q) +
                         "); preconditioner is not admissible");
    }
    return 0.0;
  }
  return std::sqrt(q);
}

inline double m_seminorm(const PrimalDualPoint& x, const CpPreconditioner& M) {
  return seminorm_from_quadratic(m_inner(x, x, M), x.squared_norm());
}

/// M as an explicit (q+p) x (q+p) matrix, primal block first. Diagnostics only.
inline DenseMatrix assemble(const CpPreconditioner& M) {
  const Index q = M.dim_u();
  const Index p = M.dim_v();
  const DenseMatrix K = M.K().to_dense();
  DenseMatrix out = DenseMatrix::Zero(q + p, q + p);
  out.topLeftCorner(q, q).diagonal().setConstant(1.0 / M.tau());
  out.bottomRightCorner(p, p).diagonal().setConstant(1.0 / M.sigma());
  out.topRightCorner(q, p) = -K.transpose();
  out.bottomLeftCorner(p, q) = -K;
  return out;
}

/// Lipschitz constant of (M + A)^{-1} for the CP operator pair:
/// max{ sqrt(2) sigma, tau sqrt(8 sigma^2 ||K||^2 + 1) }.
inline double resolvent_lipschitz(const CpPreconditioner& M) {
  const double s = M.sigma();
  const double t = M.tau();
  const double nk = M.norm_K();
  return std::max(std::sqrt(2.0) * s, t * std::sqrt(8.0 * s * s * nk * nk + 1.0));
}

/// M-to-norm Lipschitz bound L ||C|| with M = C C^*, where ||C|| = sqrt(||M||)
/// and ||M|| is estimated by power iteration on the assembled matrix.
inline double lipschitz_bound(const CpPreconditioner& M) {
  const auto m_norm = operator_norm(LinearOperator(assemble(M)), 1e-13, 100000);
  if (!m_norm.converged) throw NumericError("lipschitz_bound: ||M|| estimate did not converge");
  return resolvent_lipschitz(M) * std::sqrt(m_norm.value);
}

}  // namespace pha
