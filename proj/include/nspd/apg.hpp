#pragma once

#include <cmath>
#include <functional>

#include "nspd/errors.hpp"
#include "nspd/linop.hpp"
#include "nspd/prox.hpp"

namespace nspd {

struct ApgResult {
  Vector u;
  int iterations = 0;
  double residual = 0.0;  // gradient-mapping norm at u, relative to the scale
  bool converged = false;
};

// FISTA with gradient-based adaptive restart for min_u q(u) + h(u), where q is
// smooth with L-Lipschitz gradient. Stops when the gradient mapping
// L|v - prox_{h/L}(v - grad q(v)/L)| at the extrapolated point drops below
// tol * max(1, scale), and returns that prox point.
inline ApgResult apg_minimize(const std::function<Vector(const Vector&)>& grad_q, double L,
                              const ProxFunction& h, Vector u0, double tol, int max_iters,
                              double scale = 1.0) {
  if (!(L > 0.0)) throw InvalidInput("apg_minimize: L must be positive");
  ApgResult res;
  const double s = std::max(1.0, scale);
  Vector u = u0;
  Vector v = std::move(u0);
  double t = 1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Vector u_new = h.prox(v - grad_q(v) / L, 1.0 / L);
    res.iterations = it;
    res.residual = L * (v - u_new).norm() / s;
    if (!std::isfinite(res.residual)) break;
    if (res.residual <= tol) {
      res.converged = true;
      res.u = u_new;
      return res;
    }
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((v - u_new).dot(u_new - u) > 0.0) {
      // Momentum points uphill: restart.
      v = u_new;
      t = 1.0;
    } else {
      v = u_new + ((t - 1.0) / t_new) * (u_new - u);
      t = t_new;
    }
    u = u_new;
  }
  res.u = std::move(u);
  return res;
}

}  // namespace nspd
