#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <memory>
#include <variant>

#include "pha/errors.hpp"
#include "pha/random.hpp"

namespace pha {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Euclidean inner product of two equally sized vectors.
inline double dot(const Vector& x, const Vector& y) {
  detail::require_same_size(x.size(), y.size(), "dot");
  return x.dot(y);
}

/// A real p-by-q matrix K seen as a map R^q -> R^p together with its adjoint.
///
/// Storage is either dense row-major or compressed sparse rows. The matrix is
/// immutable once constructed and shared between copies, so passing operators
/// by value is cheap.
class LinearOperator {
 public:
  LinearOperator() : LinearOperator(DenseMatrix(0, 0)) {}
  explicit LinearOperator(DenseMatrix m)
      : storage_(std::make_shared<const Storage>(std::move(m))) {}
  explicit LinearOperator(SparseMatrix m) : storage_(make_sparse(std::move(m))) {}

  Index rows() const {
    return std::visit([](const auto& m) { return Index(m.rows()); }, *storage_);
  }
  Index cols() const {
    return std::visit([](const auto& m) { return Index(m.cols()); }, *storage_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(*storage_); }

  /// K u
  Vector apply(const Vector& u) const {
    detail::require_same_size(u.size(), cols(), "LinearOperator::apply");
    return std::visit([&](const auto& m) -> Vector { return m * u; }, *storage_);
  }

  /// K^T v
  Vector adjoint_apply(const Vector& v) const {
    detail::require_same_size(v.size(), rows(), "LinearOperator::adjoint_apply");
    return std::visit([&](const auto& m) -> Vector { return m.transpose() * v; }, *storage_);
  }

  DenseMatrix to_dense() const {
    return std::visit([](const auto& m) -> DenseMatrix { return DenseMatrix(m); }, *storage_);
  }

  /// Number of stored entries (all entries for dense storage).
  Index stored_entries() const {
    if (const auto* s = std::get_if<SparseMatrix>(storage_.get())) return s->nonZeros();
    return rows() * cols();
  }

  bool is_zero() const {
    return std::visit(
        [](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SparseMatrix>) {
            for (Index k = 0; k < m.outerSize(); ++k)
              for (typename SparseMatrix::InnerIterator it(m, k); it; ++it)
                if (it.value() != 0.0) return false;
            return true;
          } else {
            return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0;
          }
        },
        *storage_);
  }

  LinearOperator scaled(double c) const {
    return std::visit(
        [c](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          return LinearOperator(M(c * m));
        },
        *storage_);
  }

  /// Direct access for code that needs the entries (serialization, tests).
  const DenseMatrix* dense() const { return std::get_if<DenseMatrix>(storage_.get()); }
  const SparseMatrix* sparse() const { return std::get_if<SparseMatrix>(storage_.get()); }

 private:
  using Storage = std::variant<DenseMatrix, SparseMatrix>;

  static std::shared_ptr<const Storage> make_sparse(SparseMatrix m) {
    m.makeCompressed();
    return std::make_shared<const Storage>(std::move(m));
  }

  std::shared_ptr<const Storage> storage_;
};

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Spectral norm ||K||_2 by power iteration on K^T K.
///
/// Starts from the normalized all-ones vector. If that vector happens to lie
/// in the null space of a nonzero K, a fixed-seed Gaussian vector is used
/// instead. Stops when successive estimates agree to `tol` relative.
inline NormEstimate operator_norm(const LinearOperator& K, double tol = 1e-10,
                                  int max_iter = 5000) {
  if (max_iter < 1 || !(tol > 0.0)) throw ContractError("operator_norm: need max_iter >= 1, tol > 0");
  NormEstimate out;
  if (K.rows() == 0 || K.cols() == 0 || K.is_zero()) {
    out.converged = true;
    return out;
  }

  Vector x = Vector::Ones(K.cols()).normalized();
  Vector Kx = K.apply(x);
  if (Kx.norm() == 0.0) {
    Rng rng(0x5eed);
    for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    x.normalize();
    Kx = K.apply(x);
  }

  double estimate = Kx.norm();
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = K.adjoint_apply(Kx);
    const double wn = w.norm();
    if (wn == 0.0) break;
    x = w / wn;
    Kx = K.apply(x);
    const double next = Kx.norm();
    out.iterations = it;
    const bool settled = std::abs(next - estimate) <= tol * next;
    estimate = next;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.value = estimate;
  return out;
}

}  // namespace pha
