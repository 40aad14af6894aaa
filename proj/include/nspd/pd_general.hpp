#pragma once

#include <cmath>
#include <optional>

#include "nspd/errors.hpp"
#include "nspd/linop.hpp"
#include "nspd/problem.hpp"
#include "nspd/prox.hpp"
#include "nspd/schedule.hpp"

namespace nspd {

// Iterates of the general-convex method. Index convention: after k steps,
// x = x^k, x_prev = x^{k-1}, x_hat = xhat^k, y = y^k, y_tilde = ytilde^k, ...
// K-images are cached so one step costs one apply and one adjoint_apply.
struct PDState {
  long k = 0;
  double tau = 1.0;       // tau_k
  double tau_prev = 1.0;  // tau_{k-1}
  double rho_prev = 0.0;  // rho_{k-1}
  Vector x, x_prev, x_hat, x_hat_prev;
  Vector y, y_tilde, y_tilde_prev, y_bar;
  Vector Kx, Kx_hat, Kx_hat_prev;
};

inline PDState init_pd_state(const LinearMap& K, const Vector& x0, const Vector& y0) {
  if (x0.size() != K.cols() || y0.size() != K.rows())
    throw InvalidInput("init_pd_state: starting point does not match K");
  PDState s;
  s.x = s.x_prev = s.x_hat = s.x_hat_prev = x0;
  s.y = s.y_tilde = s.y_tilde_prev = s.y_bar = y0;
  s.Kx = K.apply(x0);
  s.Kx_hat = s.Kx_hat_prev = s.Kx;
  return s;
}

namespace detail {
inline void check_finite(long k, const Vector& a, const Vector& b, const char* who) {
  if (!a.allFinite() || !b.allFinite())
    throw DivergenceError(k, std::string(who) + ": non-finite iterate");
}
}  // namespace detail

// One iteration of the general-convex primal-dual method.
inline PDState alg1_step(PDState s, const CompositeProblem& P, const GeneralSchedule& sch) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const double tau_next = sch.next_tau(s.k, tau);

  Vector y_new = conjugate_prox(P.g, s.y_tilde + rho * s.Kx_hat, rho);
  Vector x_new = P.f.prox(s.x_hat - beta * P.K.adjoint_apply(y_new), beta);
  Vector Kx_new = P.K.apply(x_new);

  const double mom = tau_next * (1.0 - tau) / tau;
  Vector x_hat_new = x_new + mom * (x_new - s.x);
  Vector Kx_hat_new = Kx_new + mom * (Kx_new - s.Kx);

  const double back = (1.0 - sch.gamma) * s.tau_prev * (1.0 - tau) / tau;
  Vector y_tilde_new = s.y_tilde +
                       eta * (Kx_new - s.Kx_hat - (1.0 - tau) * (s.Kx - s.Kx_hat_prev)) +
                       (1.0 - sch.gamma) * (y_new - s.y_tilde) - back * (s.y - s.y_tilde_prev);
  s.y_bar = (1.0 - tau) * s.y_bar + tau * y_new;

  s.x_prev = std::move(s.x);
  s.x = std::move(x_new);
  s.x_hat_prev = std::move(s.x_hat);
  s.x_hat = std::move(x_hat_new);
  s.Kx_hat_prev = std::move(s.Kx_hat);
  s.Kx_hat = std::move(Kx_hat_new);
  s.Kx = std::move(Kx_new);
  s.y_tilde_prev = std::move(s.y_tilde);
  s.y_tilde = std::move(y_tilde_new);
  s.y = std::move(y_new);
  s.tau_prev = tau;
  s.tau = tau_next;
  s.rho_prev = rho;
  ++s.k;
  detail::check_finite(s.k, s.x, s.y_bar, "alg1_step");
  return s;
}

// Iterates of the augmented-Lagrangian scheme that keeps the splitting variable r.
struct RawState {
  long k = 0;
  double tau = 1.0;
  Vector x, x_tilde, r, y_tilde, y_bar;
};

inline RawState init_raw_state(const LinearMap& K, const Vector& x0, const Vector& y0) {
  if (x0.size() != K.cols() || y0.size() != K.rows())
    throw InvalidInput("init_raw_state: starting point does not match K");
  return RawState{0, 1.0, x0, x0, K.apply(x0), y0, y0};
}

// phi_rho(x, r, y) = <Kx - r, y> + (rho/2)|Kx - r|^2 and its partial gradients.
inline double phi_rho(const LinearMap& K, const Vector& x, const Vector& r, const Vector& y, double rho) {
  const Vector d = K.apply(x) - r;
  return d.dot(y) + 0.5 * rho * d.squaredNorm();
}
inline Vector grad_x_phi(const LinearMap& K, const Vector& x, const Vector& r, const Vector& y, double rho) {
  return K.adjoint_apply(y + rho * (K.apply(x) - r));
}
inline Vector grad_r_phi(const LinearMap& K, const Vector& x, const Vector& r, const Vector& y, double rho) {
  return rho * (r - K.apply(x)) - y;
}

// Literal form: r-update by prox of g, linearized x-update, no cached images.
inline RawState raw_scheme1_step(RawState s, const CompositeProblem& P, const GeneralSchedule& sch) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const Vector x_hat = (1.0 - tau) * s.x + tau * s.x_tilde;
  const Vector Kxh = P.K.apply(x_hat);
  Vector r_new = P.g.prox(s.y_tilde / rho + Kxh, 1.0 / rho);
  const Vector grad = grad_x_phi(P.K, x_hat, r_new, s.y_tilde, rho);
  Vector x_new = P.f.prox(x_hat - beta * grad, beta);
  s.x_tilde += (x_new - x_hat) / tau;
  s.y_bar = (1.0 - tau) * s.y_bar + tau * (s.y_tilde + rho * (Kxh - r_new));
  s.y_tilde += eta * (P.K.apply(x_new) - r_new - (1.0 - tau) * (P.K.apply(s.x) - s.r));
  s.x = std::move(x_new);
  s.r = std::move(r_new);
  s.tau = sch.next_tau(s.k, tau);
  ++s.k;
  detail::check_finite(s.k, s.x, s.y_bar, "raw_scheme1_step");
  return s;
}

// Linearly constrained variant: min f(x) + psi(x) s.t. Kx = b, with the
// schedule's L_psi equal to the Lipschitz constant of grad psi.
inline PDState constr_alg1_step(PDState s, const EqConstrainedProblem& P, const GeneralSchedule& sch) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const double tau_next = sch.next_tau(s.k, tau);

  Vector y_new = s.y_tilde + rho * (s.Kx_hat - P.b);
  Vector x_new = P.f.prox(s.x_hat - beta * (P.K.adjoint_apply(y_new) + P.psi.gradient(s.x_hat)), beta);
  Vector Kx_new = P.K.apply(x_new);

  const double mom = tau_next * (1.0 - tau) / tau;
  Vector x_hat_new = x_new + mom * (x_new - s.x);
  Vector Kx_hat_new = Kx_new + mom * (Kx_new - s.Kx);
  s.y_tilde_prev = s.y_tilde;
  s.y_tilde += eta * (Kx_new - (1.0 - tau) * s.Kx - tau * P.b);
  s.y_bar = (1.0 - tau) * s.y_bar + tau * y_new;

  s.x_prev = std::move(s.x);
  s.x = std::move(x_new);
  s.x_hat_prev = std::move(s.x_hat);
  s.x_hat = std::move(x_hat_new);
  s.Kx_hat_prev = std::move(s.Kx_hat);
  s.Kx_hat = std::move(Kx_hat_new);
  s.Kx = std::move(Kx_new);
  s.y = std::move(y_new);
  s.tau_prev = tau;
  s.tau = tau_next;
  s.rho_prev = rho;
  ++s.k;
  detail::check_finite(s.k, s.x, s.y_bar, "constr_alg1_step");
  return s;
}

// rho0 = 5 sqrt(gamma/(1-gamma)) |y0 - y*| / (|K| |x0 - x*|); falls back to
// 1/|K| when no reference point is known or the ratio degenerates.
inline double auto_rho0(double gamma, double norm_K, const Vector* x0 = nullptr,
                        const Vector* y0 = nullptr, const Vector* x_ref = nullptr,
                        const Vector* y_ref = nullptr) {
  if (x0 && y0 && x_ref && y_ref) {
    const double dx = (*x0 - *x_ref).norm(), dy = (*y0 - *y_ref).norm();
    if (dx > 0.0 && dy > 0.0) return 5.0 * std::sqrt(gamma / (1.0 - gamma)) * dy / (norm_K * dx);
  }
  return 1.0 / norm_K;
}

struct Alg1Options {
  double c = 1.0;
  double gamma = 0.5;
  std::optional<double> rho0;  // empty: auto rule
  long max_iters = 1000;
  long trace_every = 1;
  std::optional<double> tol;
};

// Runs `iters` steps, calling observe(state) after each; observe may return
// false to stop early.
template <class Step, class State, class Problem, class Schedule, class Observer>
State run_steps(Step step, State s, const Problem& P, const Schedule& sch, long iters, Observer&& observe) {
  for (long i = 0; i < iters; ++i) {
    s = step(std::move(s), P, sch);
    if (!observe(static_cast<const State&>(s))) break;
  }
  return s;
}

}  // namespace nspd
