#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nspd/errors.hpp"
#include "nspd/random.hpp"

namespace nspd {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct NormEstimate {
  double value = 0.0;
  bool exact = false;
  bool converged = true;  // false: power method hit max_iters (a warning, not an error)
  int iterations = 0;
};

class LinearMap;
NormEstimate estimate_norm(const LinearMap& K, double tol = 1e-12, int max_iters = 10000,
                           std::uint64_t seed = 0);

// A bounded linear operator R^p -> R^n with its adjoint. Stored as a dense
// row-major matrix, a sparse matrix, or a scaled identity.
class LinearMap {
 public:
  struct ScaledIdentity {
    Eigen::Index n;
    double scale;
  };

  LinearMap() : op_(ScaledIdentity{0, 0.0}) {}

  static LinearMap dense(DenseMatrix m) {
    LinearMap K;
    K.op_ = std::move(m);
    K.norm_ = estimate_norm(K);
    return K;
  }

  static LinearMap sparse(SparseMatrix m) {
    m.makeCompressed();
    LinearMap K;
    K.op_ = std::move(m);
    K.norm_ = estimate_norm(K);
    return K;
  }

  static LinearMap from_triplets(Eigen::Index rows, Eigen::Index cols,
                                 const std::vector<Triplet>& entries) {
    for (const auto& t : entries) {
      if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
        throw InvalidInput("triplet index out of range");
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    return sparse(std::move(m));
  }

  static LinearMap identity(Eigen::Index n, double scale = 1.0) {
    LinearMap K;
    K.op_ = ScaledIdentity{n, scale};
    K.norm_ = NormEstimate{std::abs(scale), true, true, 0};
    return K;
  }

  Eigen::Index rows() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            return m.n;
          else
            return m.rows();
        },
        op_);
  }

  Eigen::Index cols() const {
    return std::visit(
        [](const auto& m) -> Eigen::Index {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            return m.n;
          else
            return m.cols();
        },
        op_);
  }

  Vector apply(const Vector& x) const {
    if (x.size() != cols())
      throw InvalidInput("apply: vector has length " + std::to_string(x.size()) +
                         ", operator expects " + std::to_string(cols()));
    return std::visit(
        [&](const auto& m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            return m.scale * x;
          else
            return m * x;
        },
        op_);
  }

  Vector adjoint_apply(const Vector& y) const {
    if (y.size() != rows())
      throw InvalidInput("adjoint_apply: vector has length " + std::to_string(y.size()) +
                         ", operator expects " + std::to_string(rows()));
    return std::visit(
        [&](const auto& m) -> Vector {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            return m.scale * y;
          else
            return m.transpose() * y;
        },
        op_);
  }

  // Spectral norm estimate fixed at construction (see norm_info()).
  double norm() const { return norm_.value; }
  const NormEstimate& norm_info() const { return norm_; }

  bool is_dense() const { return std::holds_alternative<DenseMatrix>(op_); }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(op_); }

  bool is_scaled_identity(double scale) const {
    if (const auto* s = std::get_if<ScaledIdentity>(&op_)) return s->scale == scale;
    if (rows() != cols()) return false;
    const DenseMatrix d = to_dense();
    return (d - scale * DenseMatrix::Identity(rows(), cols())).cwiseAbs().maxCoeff() == 0.0;
  }

  LinearMap scaled(double s) const {
    LinearMap K;
    std::visit(
        [&](const auto& m) {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            K.op_ = ScaledIdentity{m.n, m.scale * s};
          else
            K.op_ = std::decay_t<decltype(m)>(s * m);
        },
        op_);
    K.norm_ = norm_;
    K.norm_.value = std::abs(s) * norm_.value;
    return K;
  }

  DenseMatrix to_dense() const {
    return std::visit(
        [](const auto& m) -> DenseMatrix {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ScaledIdentity>)
            return m.scale * DenseMatrix::Identity(m.n, m.n);
          else
            return DenseMatrix(m);
        },
        op_);
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    if (const auto* s = std::get_if<SparseMatrix>(&op_)) {
      for (Eigen::Index i = 0; i < s->outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(*s, i); it; ++it)
          out.emplace_back(it.row(), it.col(), it.value());
      return out;
    }
    const DenseMatrix d = to_dense();
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (d(i, j) != 0.0) out.emplace_back(i, j, d(i, j));
    return out;
  }

  // Replace the cached estimate, e.g. with an inflated safety bound.
  LinearMap with_norm(double value, bool exact = false) const {
    LinearMap K = *this;
    K.norm_ = NormEstimate{value, exact, true, 0};
    return K;
  }

 private:
  std::variant<ScaledIdentity, DenseMatrix, SparseMatrix> op_;
  NormEstimate norm_;
};

// Power iteration on K^T K. The Rayleigh quotient never overestimates, so
// callers that need a strict upper bound should inflate the result.
inline NormEstimate estimate_norm(const LinearMap& K, double tol, int max_iters,
                                  std::uint64_t seed) {
  NormEstimate est;
  if (K.rows() == 0 || K.cols() == 0) {
    est.exact = true;
    return est;
  }
  Rng rng(seed);
  Vector v(K.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();
  bool tried_fallback = false;
  double lambda_prev = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Vector w = K.apply(v);
    const double lambda = w.squaredNorm();
    Vector u = K.adjoint_apply(w);
    const double un = u.norm();
    est.iterations = it;
    if (un == 0.0) {
      if (tried_fallback) {
        est.value = 0.0;
        return est;
      }
      // The random start can be annihilated; retry from the all-positive vector.
      tried_fallback = true;
      v = Vector::Constant(K.cols(), 1.0 / std::sqrt(static_cast<double>(K.cols())));
      continue;
    }
    est.value = std::sqrt(lambda);
    if (lambda_prev >= 0.0 && std::abs(lambda - lambda_prev) <= tol * lambda) {
      est.converged = true;
      // One more Rayleigh quotient with the updated vector is never smaller.
      const Vector vn = u / un;
      est.value = std::max(est.value, K.apply(vn).norm());
      return est;
    }
    lambda_prev = lambda;
    v = u / un;
  }
  est.converged = false;
  return est;
}

// Text format: "n p nnz" then nnz lines "i j value", 0-based.
inline LinearMap read_triplets(std::istream& in) {
  long n = -1, p = -1, nnz = -1;
  if (!(in >> n >> p >> nnz) || n < 0 || p < 0 || nnz < 0)
    throw InvalidInput("triplet file: bad header");
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (long e = 0; e < nnz; ++e) {
    long i, j;
    double v;
    if (!(in >> i >> j >> v))
      throw InvalidInput("triplet file: entry " + std::to_string(e) + " malformed or missing");
    if (i < 0 || i >= n || j < 0 || j >= p)
      throw InvalidInput("triplet file: entry " + std::to_string(e) + " out of range");
    entries.emplace_back(i, j, v);
  }
  return LinearMap::from_triplets(n, p, entries);
}

inline void write_triplets(std::ostream& out, const LinearMap& K) {
  const auto t = K.triplets();
  out << K.rows() << ' ' << K.cols() << ' ' << t.size() << '\n';
  out.precision(17);
  for (const auto& e : t) out << e.row() << ' ' << e.col() << ' ' << e.value() << '\n';
}

inline void write_dense_csv(std::ostream& out, const LinearMap& K) {
  const DenseMatrix d = K.to_dense();
  out.precision(17);
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.cols(); ++j) out << (j ? "," : "") << d(i, j);
    out << '\n';
  }
}

inline void write_vector_csv(std::ostream& out, const Vector& v) {
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

inline Vector read_vector_csv(std::istream& in) {
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidInput("vector file: cannot parse '" + cell + "'");
      }
    }
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace nspd
