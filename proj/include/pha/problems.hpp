#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pha/linops.hpp"
#include "pha/random.hpp"

namespace pha {

// ---------------------------------------------------------------------------
// Proximal maps and metrics
// ---------------------------------------------------------------------------

/// Euclidean projection onto the unit simplex {x : sum x = 1, x >= 0}.
///
/// Sort-and-threshold method: sort y in decreasing order, find the largest
/// rho with mu_rho > (sum_{i<=rho} mu_i - 1) / rho, shift by that threshold and
/// clip at zero. Ties in the sort cannot change the threshold, so the result
/// does not depend on tie order.
inline Vector project_simplex(const Vector& y) {
  const Index n = y.size();
  if (n == 0) throw DimensionError("project_simplex: empty vector");
  if (!y.allFinite()) throw ContractError("project_simplex: non-finite input");

  std::vector<double> mu(y.data(), y.data() + n);
  std::sort(mu.begin(), mu.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += mu[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (mu[j] - t > 0.0) theta = t;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

inline constexpr double kSimplexSlack = 1e-8;

inline bool on_simplex(const Vector& x, double slack = kSimplexSlack) {
  return x.size() > 0 && x.minCoeff() >= -slack && std::abs(x.sum() - 1.0) <= slack;
}

/// Duality gap of the matrix game min_{u in simplex} max_{v in simplex} <Ku, v>
/// at a feasible pair: max_i (Ku)_i - min_j (K^T v)_j.
inline double game_gap(const Vector& u, const Vector& v, const LinearOperator& K) {
  if (!on_simplex(u) || !on_simplex(v)) throw ContractError("game_gap: (u, v) not on the simplices");
  return K.apply(u).maxCoeff() - K.adjoint_apply(v).minCoeff();
}

/// sqrt(||u - P(u - K^T v)||^2 + ||v - P(v + K u)||^2) with P the simplex projection.
inline double game_residual(const Vector& u, const Vector& v, const LinearOperator& K) {
  const Vector ru = u - project_simplex(u - K.adjoint_apply(v));
  const Vector rv = v - project_simplex(v + K.apply(u));
  return std::sqrt(ru.squaredNorm() + rv.squaredNorm());
}

/// prox of theta * ||.||_1.
inline Vector soft_threshold(const Vector& y, double theta) {
  if (!(theta >= 0.0)) throw ContractError("soft_threshold: theta must be >= 0");
  return y.unaryExpr([theta](double t) {
    const double m = std::abs(t) - theta;
    return m > 0.0 ? std::copysign(m, t) : 0.0;
  });
}

/// prox of sigma * g^* for g = 1/2 ||. - b||^2, i.e. (y - sigma b) / (1 + sigma).
inline Vector prox_gstar_lasso(const Vector& y, double sigma, const Vector& b) {
  if (!(sigma > 0.0)) throw ContractError("prox_gstar_lasso: sigma must be > 0");
  detail::require_same_size(y.size(), b.size(), "prox_gstar_lasso");
  return (y - sigma * b) / (1.0 + sigma);
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

enum class GameVariant { uniform_pm1, normal01, normal0_10, sparse_uniform };
enum class LassoVariant { gaussian, correlated };

inline constexpr std::string_view to_string(GameVariant v) {
  switch (v) {
    case GameVariant::uniform_pm1: return "uniform_pm1";
    case GameVariant::normal01: return "normal01";
    case GameVariant::normal0_10: return "normal0_10";
    case GameVariant::sparse_uniform: return "sparse_uniform";
  }
  return "?";
}

inline constexpr std::string_view to_string(LassoVariant v) {
  return v == LassoVariant::gaussian ? "gaussian" : "correlated";
}

inline std::optional<GameVariant> parse_game_variant(std::string_view s) {
  for (auto v : {GameVariant::uniform_pm1, GameVariant::normal01, GameVariant::normal0_10,
                 GameVariant::sparse_uniform}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline std::optional<LassoVariant> parse_lasso_variant(std::string_view s) {
  if (s == "gaussian") return LassoVariant::gaussian;
  if (s == "correlated") return LassoVariant::correlated;
  return std::nullopt;
}

struct GameDims {
  Index p = 0;  // rows of K, dual dimension
  Index q = 0;  // cols of K, primal dimension
};

/// Benchmark sizes: (100,100), (100,100), (500,500), (1000,500).
inline constexpr GameDims default_game_dims(GameVariant v) {
  switch (v) {
    case GameVariant::uniform_pm1: return {100, 100};
    case GameVariant::normal01: return {100, 100};
    case GameVariant::normal0_10: return {500, 500};
    case GameVariant::sparse_uniform: return {1000, 500};
  }
  return {};
}

inline constexpr double kSparseDensity = 0.10;

struct MatrixGameInstance {
  LinearOperator K;
  GameVariant variant = GameVariant::uniform_pm1;
  std::uint64_t seed = 0;
};

/// Deterministic payoff matrix for (variant, seed). Entry values come from
/// stream 0 in row-major order; the sparse pattern from stream 1.
inline MatrixGameInstance gen_matrix_game(GameVariant variant, std::uint64_t seed,
                                          std::optional<GameDims> dims = std::nullopt) {
  const GameDims d = dims.value_or(default_game_dims(variant));
  if (d.p < 1 || d.q < 1) throw ContractError("gen_matrix_game: dimensions must be positive");
  Rng values(seed, 0);
  MatrixGameInstance inst{LinearOperator(), variant, seed};

  if (variant == GameVariant::sparse_uniform) {
    const auto total = static_cast<std::size_t>(d.p * d.q);
    const auto nnz = static_cast<std::size_t>(std::llround(kSparseDensity * static_cast<double>(total)));
    Rng pattern(seed, 1);
    auto positions = pattern.sample_without_replacement(total, nnz);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (auto pos : positions) {
      // Zero has probability 2^-53 under uniform01; keep the pattern exact.
      double val = values.uniform01();
      while (val == 0.0) val = values.uniform01();
      triplets.emplace_back(static_cast<Index>(pos) / d.q, static_cast<Index>(pos) % d.q, val);
    }
    SparseMatrix K(d.p, d.q);
    K.setFromTriplets(triplets.begin(), triplets.end());
    inst.K = LinearOperator(std::move(K));
    return inst;
  }

  DenseMatrix K(d.p, d.q);
  for (Index i = 0; i < d.p; ++i) {
    for (Index j = 0; j < d.q; ++j) {
      switch (variant) {
        case GameVariant::uniform_pm1: K(i, j) = values.uniform(-1.0, 1.0); break;
        case GameVariant::normal01: K(i, j) = values.normal(0.0, 1.0); break;
        case GameVariant::normal0_10: K(i, j) = values.normal(0.0, 10.0); break;
        case GameVariant::sparse_uniform: break;
      }
    }
  }
  inst.K = LinearOperator(std::move(K));
  return inst;
}

struct LassoDims {
  Index q = 2000;  // unknowns
  Index p = 1000;  // measurements
  Index s = 100;   // nonzeros of the planted signal
};

inline constexpr double kLassoNoiseStddev = 0.1;
inline constexpr double kLassoDefaultMu = 0.1;
inline constexpr double kLassoDefaultCorrelation = 0.5;

struct LassoInstance {
  LinearOperator K;  // p x q
  Vector b;          // p
  double mu = kLassoDefaultMu;
  Vector u_star;  // q, planted sparse signal
  Index s = 0;
  LassoVariant variant = LassoVariant::gaussian;
  std::optional<double> corr_v;
  std::uint64_t seed = 0;
};

/// Deterministic LASSO instance. Streams: 0 for the Gaussian matrix A, 1 for
/// the support of u*, 2 for its values (uniform on [-10, 10]), 3 for the noise
/// (standard deviation 0.1). The correlated variant builds K column by column:
/// K_1 = A_1 / sqrt(1 - v^2), K_j = v K_{j-1} + A_j.
inline LassoInstance gen_lasso(LassoVariant variant, LassoDims dims, double mu,
                               std::optional<double> corr_v, std::uint64_t seed) {
  if (dims.p < 1 || dims.q < 1 || dims.s < 0 || dims.s > dims.q) {
    throw ContractError("gen_lasso: need p, q >= 1 and 0 <= s <= q");
  }
  if (!(mu > 0.0)) throw ContractError("gen_lasso: mu must be > 0");
  if ((variant == LassoVariant::correlated) != corr_v.has_value()) {
    throw ContractError("gen_lasso: corr_v is required exactly for the correlated variant");
  }
  if (corr_v && !(*corr_v >= 0.0 && *corr_v < 1.0)) throw ContractError("gen_lasso: corr_v must lie in [0, 1)");

  Rng a_rng(seed, 0);
  DenseMatrix K(dims.p, dims.q);
  for (Index i = 0; i < dims.p; ++i)
    for (Index j = 0; j < dims.q; ++j) K(i, j) = a_rng.normal();
  if (variant == LassoVariant::correlated) {
    const double v = *corr_v;
    K.col(0) /= std::sqrt(1.0 - v * v);
    for (Index j = 1; j < dims.q; ++j) K.col(j) += v * K.col(j - 1);
  }

  LassoInstance inst;
  inst.mu = mu;
  inst.s = dims.s;
  inst.variant = variant;
  inst.corr_v = corr_v;
  inst.seed = seed;

  Rng support_rng(seed, 1);
  Rng value_rng(seed, 2);
  inst.u_star = Vector::Zero(dims.q);
  for (auto j : support_rng.sample_without_replacement(static_cast<std::size_t>(dims.q),
                                                       static_cast<std::size_t>(dims.s))) {
    double val = value_rng.uniform(-10.0, 10.0);
    while (val == 0.0) val = value_rng.uniform(-10.0, 10.0);
    inst.u_star[static_cast<Index>(j)] = val;
  }

  Rng noise_rng(seed, 3);
  Vector noise(dims.p);
  for (Index i = 0; i < dims.p; ++i) noise[i] = noise_rng.normal(0.0, kLassoNoiseStddev);

  inst.K = LinearOperator(std::move(K));
  inst.b = inst.K.apply(inst.u_star) + noise;
  return inst;
}

/// F(u) = 1/2 ||K u - b||^2 + mu ||u||_1.
inline double lasso_objective(const Vector& u, const LassoInstance& inst) {
  detail::require_same_size(u.size(), inst.K.cols(), "lasso_objective");
  return 0.5 * (inst.K.apply(u) - inst.b).squaredNorm() + inst.mu * u.lpNorm<1>();
}

// ---------------------------------------------------------------------------
// Text serialization
//
//   pha-instance matrix_game variant=<v> p=<p> q=<q> seed=<n> storage=dense
//   <p*q values, row-major>
//
//   pha-instance matrix_game ... storage=coo nnz=<n>
//   <n triples: row col value>
//
//   pha-instance lasso variant=<v> p=<p> q=<q> s=<s> mu=<mu> corr_v=<v|none> seed=<n> storage=dense
//   <K row-major> <b> <u_star>
//
// Values are written with 17 significant digits and read back exactly.
// ---------------------------------------------------------------------------

using Instance = std::variant<MatrixGameInstance, LassoInstance>;

namespace detail {

inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_matrix(std::ostream& os, const LinearOperator& K) {
  if (const auto* s = K.sparse()) {
    for (Index r = 0; r < s->outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(*s, r); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << fmt17(it.value()) << '\n';
    return;
  }
  const DenseMatrix& d = *K.dense();
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) os << (j ? " " : "") << fmt17(d(i, j));
    os << '\n';
  }
}

inline void write_vector(std::ostream& os, const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) os << (i ? " " : "") << fmt17(x[i]);
  os << '\n';
}

inline double read_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw ContractError("instance file: unexpected end of data");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ContractError("instance file: bad number '" + tok + "'");
  return v;
}

inline Vector read_vector(std::istream& is, Index n) {
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = read_double(is);
  return x;
}

inline LinearOperator read_matrix(std::istream& is, Index p, Index q, const std::string& storage,
                                  std::optional<Index> nnz) {
  if (storage == "dense") {
    DenseMatrix K(p, q);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < q; ++j) K(i, j) = read_double(is);
    return LinearOperator(std::move(K));
  }
  if (storage == "coo") {
    if (!nnz) throw ContractError("instance file: coo storage needs nnz");
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(*nnz));
    for (Index n = 0; n < *nnz; ++n) {
      const auto r = static_cast<Index>(read_double(is));
      const auto c = static_cast<Index>(read_double(is));
      if (r < 0 || r >= p || c < 0 || c >= q) throw ContractError("instance file: coo index out of range");
      t.emplace_back(r, c, read_double(is));
    }
    SparseMatrix K(p, q);
    K.setFromTriplets(t.begin(), t.end());
    return LinearOperator(std::move(K));
  }
  throw ContractError("instance file: unknown storage '" + storage + "'");
}

}  // namespace detail

inline void write_instance(std::ostream& os, const MatrixGameInstance& inst) {
  os << "pha-instance matrix_game variant=" << to_string(inst.variant) << " p=" << inst.K.rows()
     << " q=" << inst.K.cols() << " seed=" << inst.seed;
  if (inst.K.is_sparse()) {
    os << " storage=coo nnz=" << inst.K.stored_entries() << '\n';
  } else {
    os << " storage=dense\n";
  }
  detail::write_matrix(os, inst.K);
}

inline void write_instance(std::ostream& os, const LassoInstance& inst) {
  os << "pha-instance lasso variant=" << to_string(inst.variant) << " p=" << inst.K.rows()
     << " q=" << inst.K.cols() << " s=" << inst.s << " mu=" << detail::fmt17(inst.mu)
     << " corr_v=" << (inst.corr_v ? detail::fmt17(*inst.corr_v) : std::string("none"))
     << " seed=" << inst.seed << " storage=dense\n";
  detail::write_matrix(os, LinearOperator(inst.K.to_dense()));
  detail::write_vector(os, inst.b);
  detail::write_vector(os, inst.u_star);
}

inline void write_instance(std::ostream& os, const Instance& inst) {
  std::visit([&os](const auto& i) { write_instance(os, i); }, inst);
}

inline Instance read_instance(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ContractError("instance file: missing header");
  std::istringstream hs(header);
  std::string magic, kind;
  hs >> magic >> kind;
  if (magic != "pha-instance") throw ContractError("instance file: bad magic '" + magic + "'");
  std::map<std::string, std::string> kv;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ContractError("instance file: bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ContractError("instance file: header lacks '" + key + "'");
    return it->second;
  };
  const Index p = std::stol(get("p"));
  const Index q = std::stol(get("q"));
  const auto seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  std::optional<Index> nnz;
  if (kv.count("nnz")) nnz = std::stol(kv["nnz"]);

  if (kind == "matrix_game") {
    const auto variant = parse_game_variant(get("variant"));
    if (!variant) throw ContractError("instance file: unknown game variant");
    return MatrixGameInstance{detail::read_matrix(is, p, q, get("storage"), nnz), *variant, seed};
  }
  if (kind == "lasso") {
    const auto variant = parse_lasso_variant(get("variant"));
    if (!variant) throw ContractError("instance file: unknown lasso variant");
    LassoInstance inst;
    inst.variant = *variant;
    inst.seed = seed;
    inst.s = std::stol(get("s"));
    inst.mu = std::stod(get("mu"));
    if (get("corr_v") != "none") inst.corr_v = std::stod(get("corr_v"));
    inst.K = detail::read_matrix(is, p, q, get("storage"), nnz);
    inst.b = detail::read_vector(is, p);
    inst.u_star = detail::read_vector(is, q);
    return inst;
  }
  throw ContractError("instance file: unknown problem '" + kind + "'");
}

}  // namespace pha
