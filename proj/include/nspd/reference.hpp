#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include "nspd/errors.hpp"
#include "nspd/metrics.hpp"
#include "nspd/problem.hpp"
#include "nspd/solvers.hpp"

namespace nspd {

struct ReferenceOptions {
  long budget = 1000000;   // iterations per solver
  long check_every = 500;  // certification attempts
  double tol = 1e-8;       // relative agreement and relative optimality residual
};

struct ReferenceSolution {
  Vector x, y, w;
  double F_star = kInf;        // best primal value found
  double lower_bound = -kInf;  // best certified dual lower bound
  double residual = kInf;      // max(relative gap, relative infeasibility)
  double agreement = kInf;     // |F_A - F_B| / max(1, |F|)
  long iterations = 0;
  std::string source;
};

namespace detail {

// Primal evaluation returning {objective, infeasibility}.
using PrimalEval = std::function<std::pair<double, double>(const Vector&)>;

struct Candidate {
  double F = kInf, feas = kInf;
  Vector x;
};

// max(|F - lb|, feas) / max(1, |F|)
inline double score(const Candidate& c, double lb) {
  if (!std::isfinite(c.F) || !std::isfinite(lb)) return kInf;
  return std::max(std::abs(c.F - lb), c.feas) / std::max(1.0, std::abs(c.F));
}

inline ReferenceSolution two_solver_reference(const CompositeProblem& Q, const PrimalEval& primal,
                                              SolverSpec a, SolverSpec b, const ReferenceOptions& opt) {
  const Vector x0 = Vector::Zero(Q.p()), y0 = Vector::Zero(Q.n());
  Solver sa(Q, a, x0, y0), sb(Q, b, x0, y0);
  Candidate best_a, best_b;
  double lb = -kInf;
  Vector y_best = y0;
  ReferenceSolution out;
  out.source = "two-solver agreement: " + a.label + " + " + b.label;

  auto refresh = [&](const Solver& s, Candidate& keep) {
    for (const auto& x : s.x_candidates()) {
      const auto [F, feas] = primal(x);
      Candidate c{F, feas, x};
      if (score(c, lb) < score(keep, lb) || !std::isfinite(keep.F)) keep = std::move(c);
    }
  };
  for (long k = 1; k <= opt.budget; ++k) {
    sa.step();
    sb.step();
    if (k % opt.check_every != 0 && k != opt.budget) continue;
    for (const Solver* s : {&sa, &sb})
      for (const auto& y : s->y_candidates()) {
        const double v = -restored_dual_value(Q, y).first;
        if (std::isfinite(v) && v > lb) {
          lb = v;
          y_best = y;
        }
      }
    refresh(sa, best_a);
    refresh(sb, best_b);
    const Candidate& best = score(best_a, lb) <= score(best_b, lb) ? best_a : best_b;
    out.agreement = std::abs(best_a.F - best_b.F) / std::max(1.0, std::abs(best.F));
    out.residual = score(best, lb);
    out.iterations = k;
    out.F_star = best.F;
    out.lower_bound = lb;
    out.x = best.x;
    out.y = y_best;
    if (out.agreement <= opt.tol && out.residual <= opt.tol) return out;
  }
  std::ostringstream msg;
  msg.precision(6);
  msg << "reference_solution: not certified after " << opt.budget << " iterations (agreement "
      << out.agreement << ", optimality residual " << out.residual << ", tol " << opt.tol << ")";
  throw OracleFailure(msg.str());
}

// Constant-step (or accelerated, when f is strongly convex) Chambolle-Pock
// and ADMM, both read at their last iterates.
inline std::pair<SolverSpec, SolverSpec> reference_pair(const CompositeProblem& Q) {
  const double L = Q.K.norm();
  SolverSpec a, b;
  a.label = "admm";
  a.method = Method::ADMM;
  a.rho = 1.0 / L;
  a.output = OutputMode::LastIterate;
  b.label = Q.f.mu > 0.0 ? "cp_scvx" : "cp";
  b.method = Q.f.mu > 0.0 ? Method::CPScvx : Method::CP;
  b.rho = 1.0 / L;
  b.beta = 1.0 / L;
  b.output = OutputMode::LastIterate;
  return {a, b};
}

}  // namespace detail

// High-accuracy (x*, y*, F*) from two different solvers. Accepts only when
// their objective values agree and a certified duality gap (dual iterate
// scaled into dom G) is below tol, both relative to max(1, |F*|).
inline ReferenceSolution reference_solution(const CompositeProblem& P, const ReferenceOptions& opt = {}) {
  P.validate();
  auto [a, b] = detail::reference_pair(P);
  auto primal = [&P](const Vector& x) { return std::make_pair(primal_value(P, x), 0.0); };
  return detail::two_solver_reference(P, primal, a, b, opt);
}

inline ReferenceSolution reference_solution(const MatrixGame& G, const ReferenceOptions& opt = {}) {
  return reference_solution(G.as_composite(), opt);
}

// The objective f + psi is tracked together with |Kx - b|; both enter the residual.
inline ReferenceSolution reference_solution(const EqConstrainedProblem& P, const ReferenceOptions& opt = {}) {
  const CompositeProblem Q = P.as_composite();
  auto [a, b] = detail::reference_pair(Q);
  auto primal = [&P](const Vector& x) {
    return std::make_pair(P.f.value(x) + P.psi.value(x), (P.K.apply(x) - P.b).norm());
  };
  return detail::two_solver_reference(Q, primal, a, b, opt);
}

// B = -I only: eliminating w = Kx - b leaves min f(x) + psi(Kx - b).
inline ReferenceSolution reference_solution(const SemiStrongProblem& P, const ReferenceOptions& opt = {}) {
  if (!P.B.is_scaled_identity(-1.0))
    throw CertificateUnavailable("reference_solution: semi-strong reference needs B = -I");
  const CompositeProblem Q{P.f, translate(P.psi, P.b), P.K};
  ReferenceSolution r = reference_solution(Q, opt);
  r.w = P.K.apply(r.x) - P.b;
  return r;
}

}  // namespace nspd
