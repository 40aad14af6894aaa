#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "nspd/errors.hpp"

namespace nspd {

struct StepParams {
  double tau;
  double rho;
  double beta;
  double eta;
};

// tau_k = c/(k+c), rho_k = rho0/tau_k, beta_k = gamma/(|K|^2 rho_k + gamma L_psi),
// eta_k = (1-gamma) rho_k. L_psi is nonzero only for the linearly constrained
// variant with a smooth term.
struct GeneralSchedule {
  double c = 1.0;
  double gamma = 0.5;
  double rho0 = 1.0;
  double norm_K = 1.0;
  double L_psi = 0.0;

  void validate() const {
    if (!(c >= 1.0)) throw ConfigError("general schedule: c must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("general schedule: gamma must lie in (0,1)");
    if (!(rho0 > 0.0)) throw ConfigError("general schedule: rho0 must be positive");
    if (!(norm_K > 0.0)) throw ConfigError("general schedule: |K| must be positive");
    if (!(L_psi >= 0.0)) throw ConfigError("general schedule: L_psi must be nonnegative");
  }

  double tau(long k) const { return c / (static_cast<double>(k) + c); }

  StepParams params(double t) const {
    const double rho = rho0 / t;
    return {t, rho, gamma / (norm_K * norm_K * rho + gamma * L_psi), (1.0 - gamma) * rho};
  }

  StepParams at(long k) const { return params(tau(k)); }
  double next_tau(long k, double) const { return tau(k + 1); }
};

inline StepParams schedule_at(const GeneralSchedule& s, long k) {
  if (k < 0) throw InvalidInput("schedule_at: k must be nonnegative");
  s.validate();
  return s.at(k);
}

enum class StrongCase { Case1, Case2 };

// rho_k = rho0/tau_k^2, beta_k = Gamma/(rho_k |K|^2), eta_k = (1-gamma) rho_k with
// Gamma = 2 - 1/gamma. Case1: tau_{k+1} = (tau_k/2)(sqrt(tau_k^2+4) - tau_k);
// Case2: tau_k = c/(k+c) with c > 2.
struct StrongSchedule {
  StrongCase which = StrongCase::Case1;
  double gamma = 0.75;
  double rho0 = 0.0;
  double c = 4.0;  // Case2 only
  double mu_f = 0.0;
  double norm_K = 1.0;

  double Gamma() const { return 2.0 - 1.0 / gamma; }

  double rho0_bound() const {
    const double G = Gamma(), L2 = norm_K * norm_K;
    if (which == StrongCase::Case1) return G * mu_f / (2.0 * L2);
    return c * (c - 1.0) * G * mu_f / ((2.0 * c - 1.0) * L2);
  }

  void validate(bool check_rho_bound = true) const {
    if (!(gamma > 0.5 && gamma < 1.0)) throw ConfigError("strong schedule: gamma must lie in (1/2,1)");
    if (!(mu_f > 0.0)) throw ConfigError("strong schedule: mu_f must be positive");
    if (!(norm_K > 0.0)) throw ConfigError("strong schedule: |K| must be positive");
    if (which == StrongCase::Case2 && !(c > 2.0))
      throw ConfigError("strong schedule: Case2 requires c > 2");
    if (!(rho0 > 0.0)) throw ConfigError("strong schedule: rho0 must be positive");
    const double bound = rho0_bound();
    if (check_rho_bound && rho0 > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      if (which == StrongCase::Case1)
        msg << "strong schedule: rho0 = " << rho0 << " violates rho0 <= Gamma*mu_f/(2|K|^2) = " << bound;
      else
        msg << "strong schedule: rho0 = " << rho0
            << " violates rho0 <= c(c-1)Gamma*mu_f/((2c-1)|K|^2) = " << bound;
      throw ConfigError(msg.str());
    }
  }

  double tau0() const { return 1.0; }

  double next_tau(long k, double tau_k) const {
    if (which == StrongCase::Case1) return 0.5 * tau_k * (std::sqrt(tau_k * tau_k + 4.0) - tau_k);
    return c / (static_cast<double>(k + 1) + c);
  }

  StepParams params(double t) const {
    const double rho = rho0 / (t * t);
    return {t, rho, Gamma() / (rho * norm_K * norm_K), (1.0 - gamma) * rho};
  }
};

// Walks the tau recursion from k = 0; solvers carry tau in their state instead.
inline StepParams strong_schedule_at(const StrongSchedule& s, long k) {
  if (k < 0) throw InvalidInput("strong_schedule_at: k must be nonnegative");
  s.validate();
  double t = s.tau0();
  if (s.which == StrongCase::Case2) {
    t = s.c / (static_cast<double>(k) + s.c);
  } else {
    for (long i = 0; i < k; ++i) t = s.next_tau(i, t);
  }
  return s.params(t);
}

}  // namespace nspd
