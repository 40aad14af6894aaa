#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nspd/errors.hpp"
#include "nspd/linop.hpp"
#include "nspd/prox.hpp"
#include "nspd/random.hpp"

namespace nspd {

// min_x f(x) + g(Kx)
struct CompositeProblem {
  ProxFunction f;
  ProxFunction g;
  LinearMap K;

  Eigen::Index p() const { return K.cols(); }
  Eigen::Index n() const { return K.rows(); }

  // Dimension checks; with a point, also checks that f(x) + g(Kx) is finite there.
  void validate(const std::optional<Vector>& feasible_x = std::nullopt) const {
    if (!f.prox || !g.prox) throw InvalidInput("composite problem: f and g need a prox");
    if (f.dim != 0 && f.dim != p())
      throw InvalidInput("composite problem: f has dimension " + std::to_string(f.dim) +
                         " but K has " + std::to_string(p()) + " columns");
    if (g.dim != 0 && g.dim != n())
      throw InvalidInput("composite problem: g has dimension " + std::to_string(g.dim) +
                         " but K has " + std::to_string(n()) + " rows");
    if (feasible_x) {
      if (feasible_x->size() != p()) throw InvalidInput("composite problem: bad feasible point size");
      const double v = f.value(*feasible_x) + g.value(K.apply(*feasible_x));
      if (!std::isfinite(v)) throw InvalidInput("composite problem: objective is not finite at the given point");
    }
  }
};

// min_x f(x) + psi(x) s.t. Kx = b, psi smooth with Lipschitz gradient.
struct EqConstrainedProblem {
  ProxFunction f;
  ProxFunction psi;
  LinearMap K;
  Vector b;

  double L_psi() const { return psi.smooth_lipschitz.value_or(0.0); }

  void validate(std::uint64_t seed = 0) const {
    if (b.size() != K.rows()) throw InvalidInput("constrained problem: b does not match K");
    if (!psi.gradient || !psi.smooth_lipschitz)
      throw InvalidInput("constrained problem: psi needs a gradient and its Lipschitz constant");
    Rng rng(seed);
    std::vector<Vector> pts;
    for (int i = 0; i < 10; ++i) {
      Vector x(K.cols());
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = rng.normal();
      pts.push_back(x);
    }
    const double err = gradient_check(psi, pts);
    if (err > 1e-5)
      throw InvalidInput("constrained problem: psi gradient fails the finite-difference check (" +
                         std::to_string(err) + ")");
  }

  // f + psi folded into one prox; available when psi is a plain quadratic.
  CompositeProblem as_composite() const {
    if (!psi.quadratic_form)
      throw CertificateUnavailable("constrained problem: psi is not a quadratic, cannot fold into f");
    return {add_quadratic(f, psi.quadratic_form->first, psi.quadratic_form->second),
            point_indicator(b), K};
  }
};

struct ClosedFormNegIdentity {};
struct InnerApg {
  double tol = 1e-10;
  int max_iters = 500;
};
using WSolver = std::variant<ClosedFormNegIdentity, InnerApg>;

// min_{x,w} f(x) + psi(w) s.t. Kx + Bw = b, f strongly convex.
struct SemiStrongProblem {
  ProxFunction f;
  ProxFunction psi;
  LinearMap K;
  LinearMap B;
  Vector b;
  std::optional<double> nu0;  // default: 0 when B = -I, else |B|^2
  WSolver w_solver = ClosedFormNegIdentity{};

  double nu() const {
    if (nu0) return *nu0;
    return B.is_scaled_identity(-1.0) ? 0.0 : B.norm() * B.norm();
  }

  void validate() const {
    if (K.rows() != B.rows() || b.size() != K.rows())
      throw InvalidInput("semi-strong problem: K, B and b must have matching rows");
    if (!(f.mu > 0.0)) throw ConfigError("semi-strong problem: f must be strongly convex");
    if (nu() < 0.0) throw ConfigError("semi-strong problem: nu0 must be nonnegative");
    if (std::holds_alternative<ClosedFormNegIdentity>(w_solver) && !B.is_scaled_identity(-1.0))
      throw ConfigError("semi-strong problem: closed-form w-update requires B = -I");
  }
};

// min_{x in simplex_p} max_{y in simplex_n} <Kx, y>
struct MatrixGame {
  LinearMap K;

  CompositeProblem as_composite() const {
    return {simplex_prox(K.cols()), simplex_support(K.rows()), K};
  }
};

}  // namespace nspd
