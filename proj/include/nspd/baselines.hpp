#pragma once

#include <cmath>
#include <optional>

#include "nspd/apg.hpp"
#include "nspd/errors.hpp"
#include "nspd/metrics.hpp"
#include "nspd/pd_general.hpp"
#include "nspd/problem.hpp"

namespace nspd {

enum class OutputMode { Ergodic, LastIterate };

struct BaselineConfig {
  double rho = 1.0;   // dual step (CP) or penalty (ADMM)
  double beta = 1.0;  // primal step (CP)
  OutputMode output_mode = OutputMode::Ergodic;
  double inner_tol = 1e-10;  // ADMM x-subproblem
  int inner_max_iters = 5000;
};

// Chambolle-Pock. The ergodic averages use weight 1 per step for the
// constant-step method and weight rho_k/rho_0 for the accelerated one.
struct CPState {
  long k = 0;
  double rho = 1.0, beta = 1.0;
  Vector x, x_bar, y;
  Vector x_avg, y_avg;
  double weight_sum = 0.0;

  const Vector& x_out(OutputMode m) const { return m == OutputMode::Ergodic && k > 0 ? x_avg : x; }
  const Vector& y_out(OutputMode m) const { return m == OutputMode::Ergodic && k > 0 ? y_avg : y; }
};

inline CPState init_cp_state(const LinearMap& K, const Vector& x0, const Vector& y0, const BaselineConfig& cfg) {
  if (x0.size() != K.cols() || y0.size() != K.rows())
    throw InvalidInput("init_cp_state: starting point does not match K");
  if (!(cfg.rho > 0.0) || !(cfg.beta > 0.0)) throw ConfigError("init_cp_state: steps must be positive");
  CPState s;
  s.rho = cfg.rho;
  s.beta = cfg.beta;
  s.x = s.x_bar = s.x_avg = x0;
  s.y = s.y_avg = y0;
  return s;
}

namespace detail {
inline CPState cp_iterate(CPState s, const CompositeProblem& P, double theta, double weight,
                          double beta_next, double rho_next) {
  s.y = conjugate_prox(P.g, s.y + s.rho * P.K.apply(s.x_bar), s.rho);
  Vector x_new = P.f.prox(s.x - s.beta * P.K.adjoint_apply(s.y), s.beta);
  s.x_bar = x_new + theta * (x_new - s.x);
  s.x = std::move(x_new);
  s.weight_sum += weight;
  const double a = weight / s.weight_sum;
  s.x_avg += a * (s.x - s.x_avg);
  s.y_avg += a * (s.y - s.y_avg);
  s.beta = beta_next;
  s.rho = rho_next;
  ++s.k;
  check_finite(s.k, s.x, s.y, "chambolle_pock");
  return s;
}
}  // namespace detail

inline CPState cp_step(CPState s, const CompositeProblem& P) {
  const double b = s.beta, r = s.rho;
  return detail::cp_iterate(std::move(s), P, 1.0, 1.0, b, r);
}

// Accelerated variant for mu-strongly convex f: theta = 1/sqrt(1 + 2 mu beta),
// beta <- theta beta, rho <- rho/theta.
inline CPState cp_scvx_step(CPState s, const CompositeProblem& P, double rho0) {
  if (!(P.f.mu > 0.0)) throw ConfigError("cp_scvx_step: f must be strongly convex");
  const double theta = 1.0 / std::sqrt(1.0 + 2.0 * P.f.mu * s.beta);
  const double w = s.rho / rho0;
  const double b = theta * s.beta, r = s.rho / theta;
  return detail::cp_iterate(std::move(s), P, theta, w, b, r);
}

// Scaled-form ADMM on min f(x) + g(r) s.t. Kx = r; the dual iterate is rho * u.
struct ADMMState {
  long k = 0;
  Vector x, r, u;
  Vector x_avg, r_avg, u_avg;
  int inner_iterations = 0;

  const Vector& x_out(OutputMode m) const { return m == OutputMode::Ergodic && k > 0 ? x_avg : x; }
  Vector y_out(OutputMode m, double rho) const {
    return rho * (m == OutputMode::Ergodic && k > 0 ? u_avg : u);
  }
};

inline ADMMState init_admm_state(const LinearMap& K, const Vector& x0, const Vector& y0, double rho) {
  if (x0.size() != K.cols() || y0.size() != K.rows())
    throw InvalidInput("init_admm_state: starting point does not match K");
  ADMMState s;
  s.x = s.x_avg = x0;
  s.r = s.r_avg = K.apply(x0);
  s.u = s.u_avg = y0 / rho;
  return s;
}

inline ADMMState admm_step(ADMMState s, const CompositeProblem& P, const BaselineConfig& cfg) {
  const double rho = cfg.rho;
  const Vector v = s.r - s.u;
  const Vector KTv = P.K.adjoint_apply(v);
  auto grad = [&](const Vector& x) -> Vector { return rho * (P.K.adjoint_apply(P.K.apply(x)) - KTv); };
  const double L = rho * P.K.norm() * P.K.norm() * (1.0 + 1e-9);
  ApgResult sub = apg_minimize(grad, L, P.f, s.x, cfg.inner_tol, cfg.inner_max_iters, rho * KTv.norm());
  if (!sub.converged)
    throw InnerSolverError(sub.residual, "admm_step: x-subproblem did not converge at iteration " +
                                             std::to_string(s.k));
  s.x = std::move(sub.u);
  s.inner_iterations = sub.iterations;
  const Vector Kx = P.K.apply(s.x);
  s.r = P.g.prox(Kx + s.u, 1.0 / rho);
  s.u += Kx - s.r;
  ++s.k;
  const double a = 1.0 / static_cast<double>(s.k);
  s.x_avg += a * (s.x - s.x_avg);
  s.r_avg += a * (s.r - s.r_avg);
  s.u_avg += a * (s.u - s.u_avg);
  detail::check_finite(s.k, s.x, s.u, "admm_step");
  return s;
}

// -------------------------------------------------------------- smoothing

// Iteration count for gap epsilon with prox-center y_c = 1/n on the dual simplex.
inline long smoothing_kmax(double epsilon, double norm_K, long n, long p) {
  if (!(epsilon > 0.0)) throw InvalidInput("smoothing_kmax: epsilon must be positive");
  const double v = 4.0 * norm_K / epsilon *
                   std::sqrt((1.0 - 1.0 / static_cast<double>(n)) * (1.0 - 1.0 / static_cast<double>(p)));
  return static_cast<long>(std::ceil(v - 1e-9 * v));
}

inline double smoothing_mu(double epsilon, long n) {
  return epsilon / (2.0 * (1.0 - 1.0 / static_cast<double>(n)));
}

// f_mu(x) = max_{y in simplex} <Kx, y> - (mu/2)|y - 1/n|^2 and its gradient K^T y_mu(x).
inline std::pair<double, Vector> smoothed_max(const LinearMap& K, const Vector& x, double mu,
                                              Vector* y_out = nullptr) {
  const Eigen::Index n = K.rows();
  const Vector Kx = K.apply(x);
  const Vector yc = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector y = project_simplex(yc + Kx / mu);
  const double val = Kx.dot(y) - 0.5 * mu * (y - yc).squaredNorm();
  Vector grad = K.adjoint_apply(y);
  if (y_out) *y_out = std::move(y);
  return {val, grad};
}

struct SmoothingResult {
  Trace trace;
  Vector x, y;
  long k_max = 0;
  double mu = 0.0;
};

// Nesterov's smoothing scheme for the matrix game, prox-center the simplex
// barycenter on both sides. The dual estimate is the weighted average of
// y_mu(x_i) with weights proportional to i + 1.
inline SmoothingResult smoothing_solve(const MatrixGame& G, double epsilon, double mu_scale = 1.0,
                                       std::optional<long> max_iters = std::nullopt, long trace_every = 1) {
  const LinearMap& K = G.K;
  const long n = K.rows(), p = K.cols();
  SmoothingResult res;
  res.k_max = smoothing_kmax(epsilon, K.norm(), n, p);
  res.mu = mu_scale * smoothing_mu(epsilon, n);
  const long iters = max_iters.value_or(res.k_max);
  const double L = K.norm() * K.norm() / res.mu;
  const Vector xc = Vector::Constant(p, 1.0 / static_cast<double>(p));

  Vector x = xc, grad_sum = Vector::Zero(p), y_avg = Vector::Zero(n), y_mu;
  Vector x_out = xc;
  double wsum = 0.0;
  res.trace.solver = "smoothing";
  Stopwatch clock;
  for (long k = 0; k < iters; ++k) {
    auto [val, g] = smoothed_max(K, x, res.mu, &y_mu);
    (void)val;
    const double w = 0.5 * static_cast<double>(k + 1);
    wsum += w;
    y_avg += (w / wsum) * (y_mu - y_avg);
    x_out = project_simplex(x - g / L);
    grad_sum += w * g;
    const Vector z = project_simplex(xc - grad_sum / L);
    x = (2.0 / static_cast<double>(k + 3)) * z + (static_cast<double>(k + 1) / static_cast<double>(k + 3)) * x_out;
    if (!x.allFinite()) throw DivergenceError(k + 1, "smoothing_solve: non-finite iterate");
    if ((k + 1) % trace_every == 0 || k + 1 == iters)
      res.trace.records.push_back(evaluate(G, k + 1, x_out, y_avg, clock.seconds()));
  }
  res.x = x_out;
  res.y = y_avg;
  return res;
}

}  // namespace nspd
