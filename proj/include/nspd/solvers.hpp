#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nspd/baselines.hpp"
#include "nspd/pd_general.hpp"
#include "nspd/pd_strong.hpp"

namespace nspd {

enum class Method { Alg1, Alg2, CP, CPScvx, ADMM };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Alg1: return "alg1";
    case Method::Alg2: return "alg2";
    case Method::CP: return "cp";
    case Method::CPScvx: return "cp_scvx";
    case Method::ADMM: return "admm";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "alg1") return Method::Alg1;
  if (s == "alg2") return Method::Alg2;
  if (s == "cp") return Method::CP;
  if (s == "cp_scvx") return Method::CPScvx;
  if (s == "admm") return Method::ADMM;
  throw InvalidInput("unknown method '" + s + "'");
}

// One solver variant on a composite problem. For Alg1/Alg2 rho is rho0; for
// CP it is the dual step (beta defaults to gamma/(|K|^2 rho)); for ADMM it is
// the penalty.
struct SolverSpec {
  std::string label;
  Method method = Method::Alg1;
  double c = 1.0;
  double gamma = 0.5;
  double rho = 1.0;
  std::optional<double> beta;
  StrongCase strong_case = StrongCase::Case1;
  OutputMode output = OutputMode::Ergodic;
  PrimalUpdate update = PrimalUpdate::Prox;
  std::optional<double> norm_K;
  bool enforce_bounds = true;  // false: allow rho0 above the strongly convex bound
};

// Steps any of the methods behind one interface and exposes the iterates a
// trace should be evaluated at.
class Solver {
 public:
  Solver(const CompositeProblem& P, SolverSpec spec, const Vector& x0, const Vector& y0)
      : P_(&P), spec_(std::move(spec)) {
    const double L = spec_.norm_K.value_or(P.K.norm());
    switch (spec_.method) {
      case Method::Alg1: {
        general_ = GeneralSchedule{spec_.c, spec_.gamma, spec_.rho, L, 0.0};
        general_.validate();
        state_ = init_pd_state(P.K, x0, y0);
        break;
      }
      case Method::Alg2: {
        strong_ = StrongSchedule{spec_.strong_case, spec_.gamma, spec_.rho, spec_.c, P.f.mu, L};
        strong_.validate(spec_.enforce_bounds);
        state_ = init_strong_state(P.K, x0, y0);
        break;
      }
      case Method::CP:
      case Method::CPScvx: {
        BaselineConfig cfg;
        cfg.rho = spec_.rho;
        cfg.beta = spec_.beta.value_or(spec_.gamma / (L * L * spec_.rho));
        if (cfg.rho * cfg.beta * L * L > 1.0 + 1e-12)
          throw ConfigError("chambolle-pock: rho * beta * |K|^2 must be <= 1");
        if (spec_.method == Method::CPScvx && !(P.f.mu > 0.0))
          throw ConfigError("cp_scvx: f must be strongly convex");
        state_ = init_cp_state(P.K, x0, y0, cfg);
        break;
      }
      case Method::ADMM: {
        admm_cfg_.rho = spec_.rho;
        state_ = init_admm_state(P.K, x0, y0, spec_.rho);
        break;
      }
    }
  }

  void step() {
    std::visit(
        [&](auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PDState>)
            s = alg1_step(std::move(s), *P_, general_);
          else if constexpr (std::is_same_v<S, StrongState>)
            s = alg2_step(std::move(s), *P_, strong_, spec_.update);
          else if constexpr (std::is_same_v<S, CPState>)
            s = spec_.method == Method::CP ? cp_step(std::move(s), *P_) : cp_scvx_step(std::move(s), *P_, spec_.rho);
          else
            s = admm_step(std::move(s), *P_, admm_cfg_);
        },
        state_);
  }

  long k() const {
    return std::visit([](const auto& s) { return s.k; }, state_);
  }

  Vector x_out() const {
    return std::visit(
        [&](const auto& s) -> Vector {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PDState> || std::is_same_v<S, StrongState>)
            return s.x;
          else
            return s.x_out(spec_.output);
        },
        state_);
  }

  Vector y_out() const {
    return std::visit(
        [&](const auto& s) -> Vector {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PDState> || std::is_same_v<S, StrongState>)
            return s.y_bar;
          else if constexpr (std::is_same_v<S, CPState>)
            return s.y_out(spec_.output);
          else
            return s.y_out(spec_.output, spec_.rho);
        },
        state_);
  }

  // Every primal / dual iterate the method carries; reference computation
  // keeps whichever is best.
  std::vector<Vector> x_candidates() const {
    return std::visit(
        [&](const auto& s) -> std::vector<Vector> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PDState> || std::is_same_v<S, StrongState>)
            return {s.x};
          else
            return {s.x, s.x_avg};
        },
        state_);
  }

  std::vector<Vector> y_candidates() const {
    return std::visit(
        [&](const auto& s) -> std::vector<Vector> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PDState> || std::is_same_v<S, StrongState>)
            return {s.y_bar, s.y};
          else if constexpr (std::is_same_v<S, CPState>)
            return {s.y, s.y_avg};
          else
            return {spec_.rho * s.u, spec_.rho * s.u_avg};
        },
        state_);
  }

  const SolverSpec& spec() const { return spec_; }

 private:
  const CompositeProblem* P_;
  SolverSpec spec_;
  GeneralSchedule general_;
  StrongSchedule strong_;
  BaselineConfig admm_cfg_;
  std::variant<PDState, StrongState, CPState, ADMMState> state_;
};

// Runs a variant for max_iters and records the output iterates every
// trace_every steps (and at the last step).
inline Trace run_traced(const CompositeProblem& P, const SolverSpec& spec, const Vector& x0, const Vector& y0,
                        long max_iters, long trace_every = 1, Vector* x_final = nullptr,
                        Vector* y_final = nullptr) {
  Solver s(P, spec, x0, y0);
  Trace t;
  t.solver = spec.label.empty() ? method_name(spec.method) : spec.label;
  Stopwatch clock;
  for (long i = 0; i < max_iters; ++i) {
    s.step();
    if (s.k() % trace_every == 0 || i + 1 == max_iters)
      t.records.push_back(evaluate(P, s.k(), s.x_out(), s.y_out(), clock.seconds()));
  }
  if (x_final) *x_final = s.x_out();
  if (y_final) *y_final = s.y_out();
  return t;
}

}  // namespace nspd
