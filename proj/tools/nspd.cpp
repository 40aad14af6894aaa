#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nspd/bench.hpp"

using namespace nspd;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCertificate = 2;
constexpr int kExitOracle = 3;

void print_report(const ExperimentReport& rep) {
  std::cout << "reference F* = " << std::setprecision(12) << rep.reference.F_star << "  (residual "
            << std::setprecision(3) << rep.reference.residual << ", " << rep.reference.iterations
            << " iterations)\n";
  for (const auto& s : rep.solvers) {
    std::cout << "  " << std::left << std::setw(20) << s.label << std::right;
    if (s.error) {
      std::cout << "error: " << *s.error << '\n';
      continue;
    }
    if (s.slope)
      std::cout << "slope " << std::fixed << std::setprecision(3) << *s.slope << std::defaultfloat;
    else
      std::cout << "slope n/a";
    if (s.check)
      std::cout << "  certificate " << (s.check->passed ? "ok" : "VIOLATED") << " (worst ratio "
                << std::setprecision(3) << s.check->worst_ratio << ")";
    std::cout << '\n';
  }
}

ProxFunction make_function(const json& j, Eigen::Index dim, const Vector& b) {
  const std::string type = j.at("type");
  if (type == "zero") return zero_function(dim);
  if (type == "l1") return l1_prox(j.value("lambda", 1.0));
  if (type == "elastic") return elastic_prox(j.value("lambda", 1.0), j.value("mu", 1.0));
  if (type == "quadratic") return quadratic(j.value("sigma", 1.0), Vector::Zero(dim));
  if (type == "l1_shifted") return l1_shifted_prox(b);
  if (type == "simplex") return simplex_prox(dim);
  if (type == "simplex_support") return simplex_support(dim);
  throw ConfigError("unknown function type '" + type + "'");
}

// Without "rho": Alg1 uses auto_rho0 (sharper with a reference), Alg2 the largest
// admissible rho0, everything else 1/|K|.
SolverSpec make_solver(const json& j, const CompositeProblem& P, const ReferenceSolution* ref) {
  SolverSpec s;
  s.method = parse_method(j.at("method"));
  s.label = j.value("label", std::string(method_name(s.method)));
  s.c = j.value("c", s.c);
  s.gamma = j.value("gamma", s.method == Method::Alg2 ? 0.75 : 0.5);
  if (j.value("case", 1) == 2) s.strong_case = StrongCase::Case2;
  const double L = P.K.norm();
  if (j.contains("rho")) {
    s.rho = j.at("rho");
  } else if (s.method == Method::Alg1) {
    const Vector x0 = Vector::Zero(P.p()), y0 = Vector::Zero(P.n());
    s.rho = ref ? auto_rho0(s.gamma, L, &x0, &y0, &ref->x, &ref->y) : auto_rho0(s.gamma, L);
  } else if (s.method == Method::Alg2) {
    s.rho = StrongSchedule{s.strong_case, s.gamma, 0.0, s.c, P.f.mu, L}.rho0_bound();
  } else {
    s.rho = 1.0 / L;
  }
  if (j.contains("beta")) s.beta = j.at("beta").get<double>();
  if (j.value("output", std::string("ergodic")) == "last") s.output = OutputMode::LastIterate;
  if (j.value("update", std::string("prox")) == "averaging") s.update = PrimalUpdate::Averaging;
  s.enforce_bounds = j.value("enforce_bounds", true);
  return s;
}

// {"K": "K.txt", "b": "b.csv", "f": {...}, "g": {...}, "solvers": [...], "max_iters": N,
//  "trace_every": N, "out": DIR, "reference": bool}
int solve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  const json cfg = json::parse(in);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };

  std::ifstream kf(resolve(cfg.at("K")));
  if (!kf) throw InvalidInput("cannot open K file");
  LinearMap K = read_triplets(kf);
  Vector b = Vector::Zero(K.rows());
  if (cfg.contains("b")) {
    std::ifstream bf(resolve(cfg.at("b")));
    if (!bf) throw InvalidInput("cannot open b file");
    b = read_vector_csv(bf);
  }
  const CompositeProblem P{make_function(cfg.at("f"), K.cols(), b), make_function(cfg.at("g"), K.rows(), b), K};
  P.validate();

  const long iters = cfg.value("max_iters", 10000L);
  const long every = cfg.value("trace_every", 1L);
  const std::string out = cfg.value("out", std::string("nspd_out"));
  std::filesystem::create_directories(out);

  std::optional<ReferenceSolution> ref;
  if (cfg.value("reference", false)) {
    ref = reference_solution(P);
    std::cout << "reference F* = " << std::setprecision(12) << ref->F_star << '\n';
  }
  const Vector x0 = Vector::Zero(P.p()), y0 = Vector::Zero(P.n());
  json summary = json::array();
  for (const auto& sj : cfg.at("solvers")) {
    const SolverSpec s = make_solver(sj, P, ref ? &*ref : nullptr);
    Vector x;
    Trace t = run_traced(P, s, x0, y0, iters, every, &x);
    t.write_csv(out + "/" + t.solver + ".csv");
    const TraceRecord& last = t.records.back();
    json e = {{"solver", t.solver}, {"F", last.F}, {"G", last.G}, {"gap", last.gap}};
    if (ref) e["relative_residual"] = relative_residual(last.F, ref->F_star);
    std::cout << "  " << std::left << std::setw(20) << t.solver << std::right << "F = " << std::setprecision(12)
              << last.F << '\n';
    summary.push_back(e);
    std::ofstream xf(out + "/" + t.solver + "_x.csv");
    write_vector_csv(xf, x);
  }
  std::ofstream(out + "/summary.json") << summary.dump(2) << '\n';
  return kExitOk;
}

int plotdata(const std::string& path, std::optional<double> fstar) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trace '" + path + "'");
  const Trace t = Trace::read_csv(in);
  std::cout << "log10_k,log10_F_residual,log10_gap\n";
  std::cout << std::setprecision(10);
  for (const auto& r : t.records) {
    if (r.k <= 0) continue;
    const double res = fstar ? relative_residual(r.F, *fstar) : std::numeric_limits<double>::quiet_NaN();
    auto lg = [](double v) { return v > 0.0 && std::isfinite(v) ? std::log10(v) : std::nan(""); };
    std::cout << std::log10(static_cast<double>(r.k)) << ',' << lg(res) << ',' << lg(r.gap) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nspd: non-stationary primal-dual solvers and experiments"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  bool paper = false, desk = false, serial = false;
  long max_iters = 0;
  auto* run = app.add_subcommand("run", "run a benchmark experiment");
  run->add_option("experiment", spec.name, "lad-case1 | lad-case2 | game")->required();
  auto* paper_flag = run->add_flag("--paper", paper, "paper-scale instance");
  run->add_flag("--desk", desk, "desk-scale instance (default)")->excludes(paper_flag);
  run->add_option("--seed", spec.seed, "instance seed");
  run->add_option("--max-iters", max_iters, "iterations per solver (default 10000)");
  run->add_option("--trace-every", spec.trace_every, "trace cadence");
  run->add_option("--out", spec.out_dir, "output directory");
  run->add_option("--epsilon", spec.epsilon, "smoothing accuracy (game)");
  run->add_option("--reference-budget", spec.reference.budget, "reference iterations per solver");
  run->add_flag("--check", spec.check, "exit 2 on a certificate violation");
  run->add_flag("--serial", serial, "run variants one after another");

  std::string config;
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem described by a JSON config");
  solve_cmd->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);

  std::string trace;
  std::optional<double> fstar;
  auto* plot = app.add_subcommand("plotdata", "emit log-log columns from a trace CSV");
  plot->add_option("trace", trace, "trace CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--fstar", fstar, "optimal value for the relative residual column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      spec.scale = paper ? Scale::Paper : Scale::Desk;
      if (max_iters > 0) spec.max_iters = max_iters;
      spec.parallel = !serial;
      const ExperimentReport rep = run_experiment(spec);
      print_report(rep);
      std::cout << "wrote " << spec.out_dir << '\n';
      if (spec.check && !rep.certificates_ok) return kExitCertificate;
      return kExitOk;
    }
    if (*solve_cmd) return solve(config);
    if (*plot) return plotdata(trace, fstar);
  } catch (const OracleFailure& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
