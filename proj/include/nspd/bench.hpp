#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nspd/baselines.hpp"
#include "nspd/errors.hpp"
#include "nspd/metrics.hpp"
#include "nspd/problem.hpp"
#include "nspd/random.hpp"
#include "nspd/reference.hpp"
#include "nspd/solvers.hpp"

namespace nspd {

// ------------------------------------------------------------- generators

struct LadConfig {
  long n = 200;
  long p = 64;
  long s = 8;
  double lambda = 0.05;
  double noise_sigma = 0.1;  // variance 0.01
  double noise_density = 0.1;
  double mu_f = 0.0;
  double correlated_fraction = 0.0;
  std::uint64_t seed = 1;

  static LadConfig desk() { return {}; }
  static LadConfig paper() {
    LadConfig c;
    c.n = 2000;
    c.p = 640;
    c.s = 80;
    return c;
  }
  void validate() const {
    if (n <= 0 || p <= 0 || s <= 0 || s > p) throw InvalidInput("LadConfig: need n, p > 0 and 0 < s <= p");
    if (!(lambda > 0.0) || !(noise_sigma >= 0.0)) throw InvalidInput("LadConfig: bad lambda or sigma");
    if (!(noise_density >= 0.0 && noise_density <= 1.0)) throw InvalidInput("LadConfig: noise_density outside [0,1]");
    if (!(correlated_fraction >= 0.0 && correlated_fraction <= 1.0))
      throw InvalidInput("LadConfig: correlated_fraction outside [0,1]");
    if (!(mu_f >= 0.0)) throw InvalidInput("LadConfig: mu_f must be nonnegative");
  }
};

struct LadInstance {
  CompositeProblem problem;
  Vector b;
  Vector x_natural;
};

inline LadInstance gen_lad(const LadConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  DenseMatrix K(cfg.n, cfg.p);
  for (long i = 0; i < cfg.n; ++i)
    for (long j = 0; j < cfg.p; ++j) K(i, j) = rng.normal();
  if (cfg.correlated_fraction > 0.0 && cfg.p > 1) {
    // column_j <- 0.5 column_j + 0.5 column_{j-1}, rescaled to norm sqrt(n).
    const long m = std::lround(cfg.correlated_fraction * static_cast<double>(cfg.p - 1));
    std::vector<std::size_t> cols = rng.sample(static_cast<std::size_t>(cfg.p - 1), static_cast<std::size_t>(m));
    std::sort(cols.begin(), cols.end());
    for (std::size_t c : cols) {
      const Eigen::Index j = static_cast<Eigen::Index>(c) + 1;
      Vector mixed = 0.5 * K.col(j) + 0.5 * K.col(j - 1);
      K.col(j) = mixed * (std::sqrt(static_cast<double>(cfg.n)) / mixed.norm());
    }
  }
  Vector x_nat = Vector::Zero(cfg.p);
  for (std::size_t j : rng.sample(static_cast<std::size_t>(cfg.p), static_cast<std::size_t>(cfg.s)))
    x_nat[static_cast<Eigen::Index>(j)] = rng.normal();
  Vector e = Vector::Zero(cfg.n);
  const auto nnz = static_cast<std::size_t>(std::lround(cfg.noise_density * static_cast<double>(cfg.n)));
  for (std::size_t i : rng.sample(static_cast<std::size_t>(cfg.n), nnz))
    e[static_cast<Eigen::Index>(i)] = cfg.noise_sigma * rng.normal();
  Vector b = K * x_nat + e;
  LadInstance inst;
  inst.problem = CompositeProblem{cfg.mu_f > 0.0 ? elastic_prox(cfg.lambda, cfg.mu_f) : l1_prox(cfg.lambda),
                                  l1_shifted_prox(b), LinearMap::dense(std::move(K))};
  inst.b = std::move(b);
  inst.x_natural = std::move(x_nat);
  return inst;
}

struct GameConfig {
  long n = 100;
  long p = 200;
  double density = 0.1;
  std::uint64_t seed = 1;

  static GameConfig desk() { return {}; }
  static GameConfig paper() { return {1000, 2000, 0.1, 1}; }
  void validate() const {
    if (n <= 0 || p <= 0) throw InvalidInput("GameConfig: n and p must be positive");
    if (!(density > 0.0 && density <= 1.0)) throw InvalidInput("GameConfig: density outside (0,1]");
  }
};

inline MatrixGame gen_game(const GameConfig& cfg) {
  cfg.validate();
  for (std::uint64_t seed = cfg.seed;; ++seed) {
    Rng rng(seed);
    std::vector<Triplet> t;
    for (long i = 0; i < cfg.n; ++i)
      for (long j = 0; j < cfg.p; ++j)
        if (rng.uniform() < cfg.density) t.emplace_back(i, j, rng.uniform(-1.0, 1.0));
    if (t.empty()) continue;
    LinearMap K = LinearMap::from_triplets(cfg.n, cfg.p, t);
    if (!(K.norm() > 0.0)) continue;
    LinearMap Kn = K.scaled(1.0 / K.norm());
    // Re-estimate so the cached norm reflects the scaled matrix itself.
    Kn = Kn.with_norm(estimate_norm(Kn).value);
    return MatrixGame{std::move(Kn)};
  }
}

// ------------------------------------------------------------ experiments

enum class Scale { Desk, Paper };

struct ExperimentSpec {
  std::string name;  // lad-case1 | lad-case2 | game
  Scale scale = Scale::Desk;
  std::uint64_t seed = 1;
  std::optional<long> max_iters;  // default 1e4
  long trace_every = 1;
  double epsilon = 1e-3;  // game only
  std::string out_dir = "nspd_out";
  ReferenceOptions reference;
  bool check = false;
  bool parallel = true;
};

struct SolverOutcome {
  std::string label;
  Trace trace;
  std::optional<std::string> error;
  std::optional<double> slope;
  std::optional<Certificate> certificate;
  std::optional<CertificateCheck> check;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json config;
  ReferenceSolution reference;
  std::vector<SolverOutcome> solvers;
  bool certificates_ok = true;
  nlohmann::json summary() const;
};

namespace detail {

// The 8 general-convex variants: Alg1 c in {1,2}, CP and ADMM at multiples of rho0.
inline std::vector<SolverSpec> lad_case1_variants(double rho0, double norm_K) {
  std::vector<SolverSpec> v;
  for (double c : {1.0, 2.0}) {
    SolverSpec s;
    s.label = c == 1.0 ? "alg1_c1" : "alg1_c2";
    s.method = Method::Alg1;
    s.c = c;
    s.gamma = 0.999;
    s.rho = rho0;
    v.push_back(s);
  }
  for (auto [scale, name] : {std::pair{0.1, "cp_0.1rho0"}, std::pair{1.0, "cp_rho0"}, std::pair{10.0, "cp_10rho0"}}) {
    SolverSpec s;
    s.label = name;
    s.method = Method::CP;
    s.rho = scale * rho0;
    s.beta = 0.999 / (norm_K * norm_K * s.rho);
    s.output = OutputMode::Ergodic;
    v.push_back(s);
  }
  for (auto [scale, name] : {std::pair{0.5, "admm_0.5rho0"}, std::pair{10.0, "admm_10rho0"}, std::pair{30.0, "admm_30rho0"}}) {
    SolverSpec s;
    s.label = name;
    s.method = Method::ADMM;
    s.rho = scale * rho0;
    s.output = OutputMode::Ergodic;
    v.push_back(s);
  }
  return v;
}

// The 7 strongly convex variants: Alg2 Case1 at the bound and 5x it, Case2 c=4,
// CP-scvx at {0.01, 0.75, 1, 5}/|K|.
inline std::vector<SolverSpec> lad_case2_variants(double mu_f, double norm_K) {
  std::vector<SolverSpec> v;
  const double L2 = norm_K * norm_K;
  {
    SolverSpec s;
    s.label = "alg2_case1";
    s.method = Method::Alg2;
    s.strong_case = StrongCase::Case1;
    s.gamma = 0.999;
    s.rho = (2.0 - 1.0 / s.gamma) * mu_f / (2.0 * L2);
    v.push_back(s);
    // Five times the admissible rho0, outside the guarantee.
    s.label = "alg2_case1_5x";
    s.rho *= 5.0;
    s.enforce_bounds = false;
    v.push_back(s);
  }
  {
    SolverSpec s;
    s.label = "alg2_case2";
    s.method = Method::Alg2;
    s.strong_case = StrongCase::Case2;
    s.c = 4.0;
    s.gamma = 0.75;
    s.rho = StrongSchedule{StrongCase::Case2, 0.75, 0.0, 4.0, mu_f, norm_K}.rho0_bound();
    v.push_back(s);
  }
  for (auto [scale, name] : {std::pair{0.01, "cp_scvx_0.01"}, std::pair{0.75, "cp_scvx_0.75"},
                             std::pair{1.0, "cp_scvx_1"}, std::pair{5.0, "cp_scvx_5"}}) {
    SolverSpec s;
    s.label = name;
    s.method = Method::CPScvx;
    s.rho = scale / norm_K;
    s.beta = 1.0 / (L2 * s.rho);
    s.output = OutputMode::LastIterate;
    v.push_back(s);
  }
  return v;
}

}  // namespace detail

inline nlohmann::json ExperimentReport::summary() const {
  nlohmann::json j;
  j["experiment"] = name;
  j["config"] = config;
  j["reference"] = {{"F_star", reference.F_star},
                    {"lower_bound", reference.lower_bound},
                    {"residual", reference.residual},
                    {"agreement", reference.agreement},
                    {"iterations", reference.iterations},
                    {"source", reference.source}};
  j["certificates_ok"] = certificates_ok;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : solvers) {
    nlohmann::json e;
    e["solver"] = s.label;
    if (s.error) e["error"] = *s.error;
    if (!s.trace.records.empty()) {
      const auto& last = s.trace.records.back();
      e["final"] = {{"k", last.k}, {"F", last.F}, {"gap", last.gap}, {"feas", last.feas}, {"time_s", last.time_s}};
    }
    if (s.slope) e["slope"] = *s.slope;
    if (s.certificate) e["certificate"] = to_json(*s.certificate);
    if (s.check) e["certificate_check"] = to_json(*s.check);
    arr.push_back(e);
  }
  j["solvers"] = arr;
  return j;
}

// Certificate matching a variant, when one applies; needs the reference point.
inline std::optional<Certificate> certificate_for(const SolverSpec& s, const CompositeProblem& P,
                                                  const ReferenceSolution& ref, const Vector& x0,
                                                  const Vector& y0) {
  if (!s.enforce_bounds) return std::nullopt;
  const double L = s.norm_K.value_or(P.K.norm());
  const double Mg = P.g.lipschitz.value_or(kInf);
  if (!std::isfinite(Mg)) return std::nullopt;
  std::optional<Certificate> c;
  if (s.method == Method::Alg1 && s.c == 1.0) {
    c = certificate_general_c1(x0, y0, ref.x, Mg, s.rho, s.gamma, L);
  } else if (s.method == Method::Alg1) {
    const double R0 = bound_general_R0(primal_value(P, x0) - ref.F_star, x0, y0, ref.x, ref.y, s.rho, s.gamma, L, s.c);
    c = certificate_general_c(bound_general_R1(R0, ref.y.norm(), Mg, s.rho, s.c), s.c);
  } else if (s.method == Method::Alg2 && s.strong_case == StrongCase::Case1) {
    c = certificate_strong_case1(x0, y0, ref.x, Mg, s.rho, s.gamma, L);
  } else if (s.method == Method::Alg2) {
    const double R0 = bound_strong_R0(primal_value(P, x0) - ref.F_star, x0, y0, ref.x, ref.y, s.rho, s.gamma, L,
                                     s.c, P.f.mu);
    c = certificate_strong_case2(bound_strong_R1(R0, ref.y.norm(), Mg, s.rho, s.c), s.c);
  }
  if (c) c->reference_source = ref.source;
  return c;
}

inline void write_report(const ExperimentReport& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& s : rep.solvers) s.trace.write_csv(dir + "/" + s.label + ".csv");
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& s : rep.solvers)
    if (s.certificate) {
      nlohmann::json e = to_json(*s.certificate);
      e["solver"] = s.label;
      if (s.check) e["check"] = to_json(*s.check);
      certs.push_back(e);
    }
  std::ofstream(dir + "/certificates.json") << certs.dump(2) << '\n';
  std::ofstream(dir + "/summary.json") << rep.summary().dump(2) << '\n';
}

// Generates the instance, certifies a reference, runs every variant and
// evaluates slopes and certificates. Throws OracleFailure before any solver
// runs when the reference cannot be certified.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
  ExperimentReport rep;
  rep.name = spec.name;
  const long iters = spec.max_iters.value_or(10000);
  const long lo = std::max(1L, iters / 100);
  rep.config = {{"experiment", spec.name}, {"scale", spec.scale == Scale::Desk ? "desk" : "paper"},
                {"seed", spec.seed}, {"max_iters", iters}, {"trace_every", spec.trace_every},
                {"reference_budget", spec.reference.budget}, {"reference_tol", spec.reference.tol}};

  auto run_all = [&](const CompositeProblem& P, const std::vector<SolverSpec>& variants, const Vector& x0,
                     const Vector& y0, bool game) {
    auto one = [&](const SolverSpec& v) {
      SolverOutcome out;
      out.label = v.label;
      try {
        out.trace = run_traced(P, v, x0, y0, iters, spec.trace_every);
      } catch (const std::exception& e) {
        out.error = e.what();
        return out;
      }
      const double Fs = rep.reference.F_star;
      try {
        out.slope = game ? rate_slope(out.trace, [](const TraceRecord& r) { return r.gap; }, lo, iters)
                         : rate_slope(out.trace, [Fs](const TraceRecord& r) { return relative_residual(r.F, Fs); },
                                      lo, iters);
      } catch (const InvalidInput&) {
      }
      if (!game) {
        out.certificate = certificate_for(v, P, rep.reference, x0, y0);
        if (out.certificate) {
          std::vector<long> ks;
          std::vector<double> vals;
          for (const auto& r : out.trace.records) {
            ks.push_back(r.k);
            vals.push_back(r.F - Fs);
          }
          out.check = check_certificate(*out.certificate, ks, vals);
        }
      }
      return out;
    };
    if (spec.parallel) {
      std::vector<std::future<SolverOutcome>> fut;
      for (const auto& v : variants) fut.push_back(std::async(std::launch::async, one, v));
      for (auto& f : fut) rep.solvers.push_back(f.get());
    } else {
      for (const auto& v : variants) rep.solvers.push_back(one(v));
    }
  };

  if (spec.name == "lad-case1" || spec.name == "lad-case2") {
    LadConfig cfg = spec.scale == Scale::Desk ? LadConfig::desk() : LadConfig::paper();
    cfg.seed = spec.seed;
    if (spec.name == "lad-case2") {
      cfg.mu_f = 0.1;
      cfg.correlated_fraction = 0.5;
    }
    rep.config["instance"] = {{"n", cfg.n}, {"p", cfg.p}, {"s", cfg.s}, {"lambda", cfg.lambda},
                              {"noise_sigma", cfg.noise_sigma}, {"noise_density", cfg.noise_density},
                              {"mu_f", cfg.mu_f}, {"correlated_fraction", cfg.correlated_fraction}};
    const LadInstance inst = gen_lad(cfg);
    const CompositeProblem& P = inst.problem;
    rep.reference = reference_solution(P, spec.reference);
    const Vector x0 = Vector::Zero(P.p()), y0 = Vector::Zero(P.n());
    const double L = P.K.norm();
    if (spec.name == "lad-case1") {
      const double rho0 = auto_rho0(0.999, L, &x0, &y0, &rep.reference.x, &rep.reference.y);
      rep.config["rho0"] = rho0;
      run_all(P, detail::lad_case1_variants(rho0, L), x0, y0, false);
    } else {
      run_all(P, detail::lad_case2_variants(cfg.mu_f, L), x0, y0, false);
    }
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream kf(spec.out_dir + "/K.txt");
    write_triplets(kf, P.K);
    std::ofstream bf(spec.out_dir + "/b.csv");
    write_vector_csv(bf, inst.b);
  } else if (spec.name == "game") {
    GameConfig cfg = spec.scale == Scale::Desk ? GameConfig::desk() : GameConfig::paper();
    cfg.seed = spec.seed;
    rep.config["instance"] = {{"n", cfg.n}, {"p", cfg.p}, {"density", cfg.density}, {"epsilon", spec.epsilon}};
    const MatrixGame G = gen_game(cfg);
    const CompositeProblem P = G.as_composite();
    rep.reference = reference_solution(G, spec.reference);
    const Vector x0 = Vector::Constant(P.p(), 1.0 / static_cast<double>(P.p()));
    const Vector y0 = Vector::Constant(P.n(), 1.0 / static_cast<double>(P.n()));
    std::vector<SolverSpec> variants;
    for (double c : {1.0, 2.0}) {
      SolverSpec s;
      s.label = c == 1.0 ? "alg1_c1" : "alg1_c2";
      s.method = Method::Alg1;
      s.c = c;
      s.gamma = 0.5;
      s.rho = 1.0 / G.K.norm();
      variants.push_back(s);
    }
    run_all(P, variants, x0, y0, true);
    for (double ms : {0.2, 1.0, 5.0}) {
      SolverOutcome out;
      out.label = "smoothing_mu" + std::string(ms == 0.2 ? "0.2" : ms == 1.0 ? "1" : "5");
      try {
        SmoothingResult r = smoothing_solve(G, spec.epsilon, ms, std::nullopt, spec.trace_every);
        out.trace = std::move(r.trace);
        out.trace.solver = out.label;
        try {
          out.slope = rate_slope(out.trace, [](const TraceRecord& t) { return t.gap; },
                                 std::max(1L, out.trace.records.back().k / 100), out.trace.records.back().k);
        } catch (const InvalidInput&) {
        }
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      rep.solvers.push_back(std::move(out));
    }
    rep.config["smoothing_kmax"] = smoothing_kmax(spec.epsilon, G.K.norm(), cfg.n, cfg.p);
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream kf(spec.out_dir + "/K.txt");
    write_triplets(kf, G.K);
  } else {
    throw InvalidInput("unknown experiment '" + spec.name + "' (expected lad-case1, lad-case2 or game)");
  }

  for (const auto& s : rep.solvers)
    if (s.check && !s.check->passed) rep.certificates_ok = false;
  write_report(rep, spec.out_dir);
  return rep;
}

}  // namespace nspd
