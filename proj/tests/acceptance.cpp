// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"

using namespace nspd;
using nspd::test::random_vector;
using nspd::test::small_lad;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

template <class F>
void guarded(int n, const std::string& what, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(n, false, what, std::string("exception: ") + e.what());
  }
}

const SolverOutcome& find(const ExperimentReport& r, const std::string& label) {
  for (const auto& s : r.solvers)
    if (s.label == label) return s;
  throw std::runtime_error("no solver " + label);
}

ExperimentReport desk_run(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.max_iters = 10000;
  spec.trace_every = 1;
  spec.parallel = false;
  spec.out_dir = (std::filesystem::temp_directory_path() / ("nspd_acceptance_" + name)).string();
  ExperimentReport r = run_experiment(spec);
  std::filesystem::remove_all(spec.out_dir);
  return r;
}

std::string check_detail(const SolverOutcome& s) {
  if (s.error) return "error: " + *s.error;
  if (!s.check) return "no certificate";
  return s.label + " checked " + std::to_string(s.check->checked) + " iterates, worst ratio " +
         fmt(s.check->worst_ratio) + ", violations " + std::to_string(s.check->violations);
}

bool check_ok(const SolverOutcome& s) { return !s.error && s.check && s.check->passed && s.check->checked > 0; }

}  // namespace

int main() {
  // 1. Moreau round trip for every builtin.
  guarded(1, "Moreau identity, all builtins, 100 pairs, tol 1e-10", [] {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& pc : nspd::test::builtin_cases(1)) worst = std::max(worst, nspd::test::moreau_roundtrip_error(pc, 100, 2));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, worst <= 1e-10 && secs < 1.0, "Moreau identity, all builtins, 100 pairs, tol 1e-10",
           "worst " + fmt(worst) + ", " + fmt(secs) + " s");
  });

  // 2. Eliminated methods against the explicit-r schemes.
  guarded(2, "Alg1/Alg2 match the raw schemes for 100 iterations, tol 1e-9", [] {
    double worst = 0.0;
    const CompositeProblem P = small_lad(11, 50, 20, 0.1);
    Rng rng(12);
    const Vector x0 = random_vector(rng, 20), y0 = random_vector(rng, 50, 0.3);
    for (double c : {1.0, 2.0}) {
      const GeneralSchedule sch{c, 0.7, 0.05, P.K.norm(), 0.0};
      PDState a = init_pd_state(P.K, x0, y0);
      RawState r = init_raw_state(P.K, x0, y0);
      for (int k = 0; k < 100; ++k) {
        a = alg1_step(std::move(a), P, sch);
        r = raw_scheme1_step(std::move(r), P, sch);
        worst = std::max({worst, (a.x - r.x).lpNorm<Eigen::Infinity>(), (a.y_bar - r.y_bar).lpNorm<Eigen::Infinity>()});
      }
    }
    for (StrongCase which : {StrongCase::Case1, StrongCase::Case2}) {
      StrongSchedule sch{which, 0.75, 0.0, 4.0, 0.1, P.K.norm()};
      sch.rho0 = 200.0 * sch.rho0_bound();
      StrongState a = init_strong_state(P.K, x0, y0);
      RawState r = init_raw_state(P.K, x0, y0);
      for (int k = 0; k < 100; ++k) {
        a = alg2_step(std::move(a), P, sch);
        r = raw_scheme3_step(std::move(r), P, sch);
        worst = std::max({worst, (a.x - r.x).lpNorm<Eigen::Infinity>(), (a.y_bar - r.y_bar).lpNorm<Eigen::Infinity>()});
      }
    }
    report(2, worst <= 1e-9, "Alg1/Alg2 match the raw schemes for 100 iterations, tol 1e-9", "worst " + fmt(worst));
  });

  // 3. Schedule invariants.
  guarded(3, "schedule invariants up to k = 1e5", [] {
    double worst_prod = 0.0, worst_rec = 0.0;
    bool tau_ok = true, eta_ok = true;
    const double L = 7.3;
    for (double c : {1.0, 2.0}) {
      const GeneralSchedule g{c, 0.999, 0.02, L, 0.0};
      for (long k = 0; k <= 100000; ++k) {
        const StepParams p = g.at(k);
        worst_prod = std::max(worst_prod, std::abs(p.rho * p.beta * L * L - g.gamma) / g.gamma);
        eta_ok = eta_ok && p.rho > p.eta;
      }
    }
    for (StrongCase which : {StrongCase::Case1, StrongCase::Case2}) {
      StrongSchedule s{which, 0.75, 0.0, 4.0, 0.1, L};
      s.rho0 = s.rho0_bound();
      double tau = s.tau0();
      for (long k = 0; k <= 100000; ++k) {
        const StepParams p = s.params(tau);
        worst_prod = std::max(worst_prod, std::abs(p.rho * p.beta * L * L - s.Gamma()) / s.Gamma());
        eta_ok = eta_ok && p.rho > p.eta;
        const double next = s.next_tau(k, tau);
        if (which == StrongCase::Case1) {
          tau_ok = tau_ok && tau <= 2.0 / (static_cast<double>(k) + 2.0) + 1e-15;
          worst_rec = std::max(worst_rec, std::abs((1.0 - next) - next * next / (tau * tau)));
        }
        tau = next;
      }
    }
    report(3, worst_prod <= 1e-12 && worst_rec <= 1e-12 && tau_ok && eta_ok, "schedule invariants up to k = 1e5",
           "rho*beta*|K|^2 rel err " + fmt(worst_prod) + ", recursion err " + fmt(worst_rec) +
               (tau_ok ? ", tau <= 2/(k+2)" : ", tau bound violated") + (eta_ok ? ", rho > eta" : ", rho <= eta"));
  });

  std::optional<ExperimentReport> case1, case2, game;
  try {
    case1 = desk_run("lad-case1");
  } catch (const std::exception& e) {
    std::printf("lad-case1 experiment failed: %s\n", e.what());
  }

  // 4. Sublinear certificate, c = 1.
  guarded(4, "Alg1 c=1 certificate on desk LAD, every iterate to 1e4", [&] {
    if (!case1) throw std::runtime_error("lad-case1 run unavailable");
    const auto& s = find(*case1, "alg1_c1");
    const bool ref_ok = case1->reference.residual <= 1e-8 && case1->reference.agreement <= 1e-8;
    report(4, ref_ok && check_ok(s), "Alg1 c=1 certificate on desk LAD, every iterate to 1e4",
           check_detail(s) + ", reference residual " + fmt(case1->reference.residual));
  });

  // 5. c = 2 certificate and the equality-constrained scheme.
  guarded(5, "Alg1 c=2 certificate and constrained scheme bounds", [&] {
    if (!case1) throw std::runtime_error("lad-case1 run unavailable");
    const auto& s = find(*case1, "alg1_c2");
    Rng rng(51);
    const DenseMatrix k = nspd::test::random_matrix(rng, 40, 80);
    const Vector b = k * random_vector(rng, 80);
    const EqConstrainedProblem P{l1_prox(0.1), quadratic(1.0), LinearMap::dense(k), b};
    P.validate();
    const ReferenceSolution ref = reference_solution(P);
    const Vector x0 = Vector::Zero(80), y0 = Vector::Zero(40);
    const double L = P.K.norm(), rho0 = 1.0 / L, gamma = 0.5;
    const GeneralSchedule sch{1.0, gamma, rho0, L, P.L_psi()};
    const double R0 = bound_constrained(x0, y0, ref.x, ref.y, rho0, gamma, L, P.L_psi());
    const Certificate cert_F = certificate_constrained(R0, "|F - F*|"), cert_feas = certificate_constrained(R0, "|Kx - b|");
    PDState st = init_pd_state(P.K, x0, y0);
    std::vector<long> ks;
    std::vector<double> objs, feas;
    for (long i = 0; i < 10000; ++i) {
      st = constr_alg1_step(std::move(st), P, sch);
      ks.push_back(st.k);
      objs.push_back(std::abs(P.f.value(st.x) + P.psi.value(st.x) - ref.F_star));
      feas.push_back((st.Kx - b).norm());
    }
    const CertificateCheck cf = check_certificate(cert_F, ks, objs), cq = check_certificate(cert_feas, ks, feas);
    report(5, check_ok(s) && cf.passed && cq.passed, "Alg1 c=2 certificate and constrained scheme bounds",
           check_detail(s) + "; constrained |F-F*| worst ratio " + fmt(cf.worst_ratio) + ", |Kx-b| worst ratio " +
               fmt(cq.worst_ratio));
  });

  try {
    case2 = desk_run("lad-case2");
  } catch (const std::exception& e) {
    std::printf("lad-case2 experiment failed: %s\n", e.what());
  }

  // 6. Accelerated certificates.
  guarded(6, "Alg2 Case 1 and Case 2 certificates on desk strongly convex LAD", [&] {
    if (!case2) throw std::runtime_error("lad-case2 run unavailable");
    const auto& a = find(*case2, "alg2_case1");
    const auto& b = find(*case2, "alg2_case2");
    report(6, check_ok(a) && check_ok(b) && case2->reference.residual <= 1e-8,
           "Alg2 Case 1 and Case 2 certificates on desk strongly convex LAD", check_detail(a) + "; " + check_detail(b));
  });

  try {
    game = desk_run("game");
  } catch (const std::exception& e) {
    std::printf("game experiment failed: %s\n", e.what());
  }

  // 7. Empirical rates over [1e2, 1e4].
  guarded(7, "log-log slopes over [1e2, 1e4]", [&] {
    if (!case1 || !case2 || !game) throw std::runtime_error("experiment runs unavailable");
    std::ostringstream detail, info;
    bool ok = true;
    auto want = [&](const ExperimentReport& r, const std::string& label, double limit) {
      const auto& s = find(r, label);
      const double v = s.slope.value_or(kInf);
      const bool pass = v <= limit;
      ok = ok && pass;
      detail << (detail.tellp() > 0 ? ", " : "") << label << " " << fmt(v) << (pass ? "" : " > " + fmt(limit));
    };
    want(*case1, "alg1_c1", -0.9);
    want(*case1, "alg1_c2", -0.9);
    want(*case1, "cp_rho0", -0.9);
    want(*case1, "admm_0.5rho0", -0.9);
    want(*case2, "alg2_case1", -1.8);
    want(*case2, "alg2_case2", -1.8);
    want(*case2, "cp_scvx_1", -1.8);
    want(*game, "alg1_c1", -0.9);
    want(*game, "alg1_c2", -0.9);
    for (const auto* r : {&*case1, &*case2, &*game})
      for (const auto& s : r->solvers)
        if (s.slope) info << "  " << r->name << "/" << s.label << " slope " << fmt(*s.slope) << "\n";
    report(7, ok, "log-log slopes over [1e2, 1e4]", detail.str());
    std::printf("%s", info.str().c_str());
  });

  // 8. Semi-strong splitting with B = -I.
  guarded(8, "semi-strong splitting, B = -I: (k+1)^-2 bounds and feasibility slope", [] {
    Rng rng(81);
    const SemiStrongProblem P{elastic_prox(0.05, 1.0), l1_prox(1.0), LinearMap::dense(nspd::test::random_matrix(rng, 40, 60)),
                              LinearMap::identity(40, -1.0), random_vector(rng, 40), std::nullopt, ClosedFormNegIdentity{}};
    P.validate();
    const ReferenceSolution ref = reference_solution(P);
    StrongSchedule sch{StrongCase::Case1, 0.75, 0.0, 4.0, P.f.mu, P.K.norm()};
    sch.rho0 = sch.rho0_bound();
    const Vector x0 = Vector::Zero(60), w0 = Vector::Zero(40), y0 = Vector::Zero(40);
    const double R0 = bound_semi_strong(x0, y0, w0, ref.x, ref.y, ref.w, sch.rho0, sch.gamma, P.K.norm(), P.nu());
    const Certificate cF = certificate_semi_strong(R0, "|F - F*|"), cq = certificate_semi_strong(R0, "|Kx + Bw - b|");
    SemiStrongState s = init_semistrong_state(P, x0, w0, y0);
    std::vector<long> ks;
    std::vector<double> objs, feas;
    for (long i = 0; i < 10000; ++i) {
      s = semistrong_step(std::move(s), P, sch);
      ks.push_back(s.k);
      objs.push_back(std::abs(P.f.value(s.x) + P.psi.value(s.w) - ref.F_star));
      feas.push_back((s.Kx + s.Bw - P.b).norm());
    }
    const CertificateCheck a = check_certificate(cF, ks, objs), b = check_certificate(cq, ks, feas);
    const double slope = rate_slope(ks, feas, 100, 10000);
    report(8, a.passed && b.passed && slope <= -1.8,
           "semi-strong splitting, B = -I: (k+1)^-2 bounds and feasibility slope",
           "|F-F*| worst ratio " + fmt(a.worst_ratio) + ", feasibility worst ratio " + fmt(b.worst_ratio) +
               ", feasibility slope " + fmt(slope));
  });

  // 9. Smoothing iteration counts.
  guarded(9, "smoothing k_max at n=1000, p=2000", [] {
    const long a = smoothing_kmax(1e-3, 1.0, 1000, 2000), b = smoothing_kmax(1e-4, 1.0, 1000, 2000);
    report(9, a == 3997 && b == 39970, "smoothing k_max at n=1000, p=2000",
           "eps 1e-3 -> " + std::to_string(a) + ", eps 1e-4 -> " + std::to_string(b));
  });

  // 10. Reference oracle against brute force.
  guarded(10, "reference oracle: tiny LAD vs LP vertices, game gap", [&] {
    double worst = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      Rng rng(100 + seed);
      const DenseMatrix K = nspd::test::random_matrix(rng, 6, 3);
      const Vector b = random_vector(rng, 6);
      const CompositeProblem P{l1_prox(0.05), l1_shifted_prox(b), LinearMap::dense(K)};
      const ReferenceSolution r = reference_solution(P);
      const double lp = nspd::test::lad_lp_vertex_value(K, b, 0.05);
      worst = std::max(worst, std::abs(r.F_star - lp) / std::max(1.0, std::abs(lp)));
    }
    GameConfig gc;
    gc.n = 30;
    gc.p = 50;
    gc.density = 0.3;
    const MatrixGame G = gen_game(gc);
    const ReferenceSolution r = reference_solution(G);
    const double gap = game_gap(G.K, r.x, r.y);
    report(10, worst <= 1e-9 && gap <= 1e-8, "reference oracle: tiny LAD vs LP vertices, game gap",
           "LAD worst rel err " + fmt(worst) + ", game gap " + fmt(gap));
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
