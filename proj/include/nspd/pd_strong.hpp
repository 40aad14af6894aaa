#pragma once

#include <cmath>
#include <variant>

#include "nspd/apg.hpp"
#include "nspd/errors.hpp"
#include "nspd/pd_general.hpp"
#include "nspd/problem.hpp"
#include "nspd/schedule.hpp"

namespace nspd {

// Second primal update: a prox step from xhat (default) or the averaging
// x^{k+1} = (1-tau_k) x^k + tau_k xtilde^{k+1}.
enum class PrimalUpdate { Prox, Averaging };

struct StrongState : PDState {
  Vector x_tilde;
};

inline StrongState init_strong_state(const LinearMap& K, const Vector& x0, const Vector& y0) {
  StrongState s;
  static_cast<PDState&>(s) = init_pd_state(K, x0, y0);
  s.x_tilde = x0;
  return s;
}

// One iteration of the strongly convex method.
inline StrongState alg2_step(StrongState s, const CompositeProblem& P, const StrongSchedule& sch,
                             PrimalUpdate update = PrimalUpdate::Prox) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const double tau_next = sch.next_tau(s.k, tau);
  const double L2 = sch.norm_K * sch.norm_K;

  Vector y_new = conjugate_prox(P.g, s.y_tilde + rho * s.Kx_hat, rho);
  const Vector KTy = P.K.adjoint_apply(y_new);
  Vector x_tilde_new = P.f.prox(s.x_tilde - (beta / tau) * KTy, beta / tau);
  Vector x_new = update == PrimalUpdate::Prox
                     ? P.f.prox(s.x_hat - KTy / (rho * L2), 1.0 / (rho * L2))
                     : Vector((1.0 - tau) * s.x + tau * x_tilde_new);
  Vector x_hat_new = (1.0 - tau_next) * x_new + tau_next * x_tilde_new;
  Vector Kx_new = P.K.apply(x_new);
  Vector Kx_hat_new = P.K.apply(x_hat_new);

  // Eliminating r from the explicit scheme gives eta_k (1 - tau_k) / rho_{k-1}
  // in front of (y^k - ytilde^{k-1}).
  const double back = tau == 1.0 ? 0.0 : eta * (1.0 - tau) / s.rho_prev;
  Vector y_tilde_new = s.y_tilde +
                       eta * (Kx_new - s.Kx_hat - (1.0 - tau) * (s.Kx - s.Kx_hat_prev)) +
                       (1.0 - sch.gamma) * (y_new - s.y_tilde) - back * (s.y - s.y_tilde_prev);
  s.y_bar = (1.0 - tau) * s.y_bar + tau * y_new;

  s.x_prev = std::move(s.x);
  s.x = std::move(x_new);
  s.x_tilde = std::move(x_tilde_new);
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
  detail::check_finite(s.k, s.x, s.y_bar, "alg2_step");
  return s;
}

// Explicit-r form of the strongly convex method.
inline RawState raw_scheme3_step(RawState s, const CompositeProblem& P, const StrongSchedule& sch) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const double L2 = sch.norm_K * sch.norm_K;
  const Vector x_hat = (1.0 - tau) * s.x + tau * s.x_tilde;
  const Vector Kxh = P.K.apply(x_hat);
  Vector r_new = P.g.prox(s.y_tilde / rho + Kxh, 1.0 / rho);
  const Vector grad = grad_x_phi(P.K, x_hat, r_new, s.y_tilde, rho);
  s.x_tilde = P.f.prox(s.x_tilde - (beta / tau) * grad, beta / tau);
  Vector x_new = P.f.prox(x_hat - grad / (rho * L2), 1.0 / (rho * L2));
  s.y_bar = (1.0 - tau) * s.y_bar + tau * (s.y_tilde + rho * (Kxh - r_new));
  s.y_tilde += eta * (P.K.apply(x_new) - r_new - (1.0 - tau) * (P.K.apply(s.x) - s.r));
  s.x = std::move(x_new);
  s.r = std::move(r_new);
  s.tau = sch.next_tau(s.k, tau);
  ++s.k;
  detail::check_finite(s.k, s.x, s.y_bar, "raw_scheme3_step");
  return s;
}

struct SemiStrongState {
  long k = 0;
  double tau = 1.0;
  Vector x, x_tilde, x_hat;
  Vector w, w_hat;
  Vector y, y_tilde, y_bar;
  Vector Kx, Bw;
  int inner_iterations = 0;  // last w-update, 0 for the closed form
};

inline SemiStrongState init_semistrong_state(const SemiStrongProblem& P, const Vector& x0,
                                             const Vector& w0, const Vector& y0) {
  if (x0.size() != P.K.cols() || w0.size() != P.B.cols() || y0.size() != P.K.rows())
    throw InvalidInput("init_semistrong_state: starting point does not match K and B");
  SemiStrongState s;
  s.x = s.x_tilde = s.x_hat = x0;
  s.w = s.w_hat = w0;
  s.y = s.y_tilde = s.y_bar = y0;
  s.Kx = P.K.apply(x0);
  s.Bw = P.B.apply(w0);
  return s;
}

// One iteration for min f(x) + psi(w) s.t. Kx + Bw = b.
inline SemiStrongState semistrong_step(SemiStrongState s, const SemiStrongProblem& P,
                                       const StrongSchedule& sch) {
  const StepParams prm = sch.params(s.tau);
  const double tau = s.tau, rho = prm.rho, beta = prm.beta, eta = prm.eta;
  const double tau_next = sch.next_tau(s.k, tau);
  const double L2 = sch.norm_K * sch.norm_K;
  const double nu = P.nu();

  const Vector Kxh = P.K.apply(s.x_hat);
  Vector w_new;
  if (std::holds_alternative<ClosedFormNegIdentity>(P.w_solver)) {
    if (!P.B.is_scaled_identity(-1.0))
      throw ConfigError("semistrong_step: closed-form w-update requires B = -I");
    const Vector v = (rho * (Kxh - P.b) + s.y_tilde + nu * s.w_hat) / (rho + nu);
    w_new = P.psi.prox(v, 1.0 / (rho + nu));
    s.inner_iterations = 0;
  } else {
    const auto& opt = std::get<InnerApg>(P.w_solver);
    const Vector lin = P.B.adjoint_apply(s.y_tilde);
    const Vector shift = Kxh - P.b;
    auto grad = [&](const Vector& w) -> Vector {
      return lin + rho * P.B.adjoint_apply(shift + P.B.apply(w)) + nu * (w - s.w_hat);
    };
    const double L = rho * P.B.norm() * P.B.norm() * (1.0 + 1e-9) + nu;
    const double scale = (lin + rho * P.B.adjoint_apply(shift) - nu * s.w_hat).norm();
    ApgResult r = apg_minimize(grad, L, P.psi, s.w, opt.tol, opt.max_iters, scale);
    if (!r.converged)
      throw InnerSolverError(r.residual, "semistrong_step: w-subproblem did not converge at iteration " +
                                             std::to_string(s.k));
    w_new = std::move(r.u);
    s.inner_iterations = r.iterations;
  }
  Vector Bw_new = P.B.apply(w_new);
  Vector y_new = s.y_tilde + rho * (Kxh + Bw_new - P.b);

  const Vector KTy = P.K.adjoint_apply(y_new);
  Vector x_tilde_new = P.f.prox(s.x_tilde - (beta / tau) * KTy, beta / tau);
  Vector x_new = P.f.prox(s.x_hat - KTy / (rho * L2), 1.0 / (rho * L2));
  Vector Kx_new = P.K.apply(x_new);

  s.x_hat = (1.0 - tau_next) * x_new + tau_next * x_tilde_new;
  s.w_hat = w_new + (tau_next * (1.0 - tau) / tau) * (w_new - s.w);
  s.y_tilde += eta * ((Kx_new + Bw_new - P.b) - (1.0 - tau) * (s.Kx + s.Bw - P.b));
  s.y_bar = (1.0 - tau) * s.y_bar + tau * y_new;

  s.x = std::move(x_new);
  s.x_tilde = std::move(x_tilde_new);
  s.w = std::move(w_new);
  s.Kx = std::move(Kx_new);
  s.Bw = std::move(Bw_new);
  s.y = std::move(y_new);
  s.tau = tau_next;
  ++s.k;
  detail::check_finite(s.k, s.x, s.y_bar, "semistrong_step");
  return s;
}

}  // namespace nspd
