#pragma once

#include <vector>

#include "nspd/bench.hpp"

namespace nspd::test {

inline Vector random_vector(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

inline DenseMatrix random_matrix(Rng& rng, Eigen::Index n, Eigen::Index p) {
  DenseMatrix m(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

// Exact spectral norm from a full SVD, independent of the power method.
inline double svd_norm(const DenseMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
  return svd.singularValues()(0);
}

// Small LAD: f = lambda |x|_1 (+ mu/2 |x|^2), g = |r - b|_1, exact |K|.
inline CompositeProblem small_lad(std::uint64_t seed, Eigen::Index n, Eigen::Index p, double mu = 0.0) {
  Rng rng(seed);
  DenseMatrix K = random_matrix(rng, n, p);
  const Vector b = random_vector(rng, n);
  const double L = svd_norm(K);
  return {mu > 0.0 ? elastic_prox(0.05, mu) : l1_prox(0.05), l1_shifted_prox(b),
          LinearMap::dense(std::move(K)).with_norm(L, true)};
}

}  // namespace nspd::test
