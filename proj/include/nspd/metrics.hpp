#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nspd/errors.hpp"
#include "nspd/linop.hpp"
#include "nspd/problem.hpp"
#include "nspd/prox.hpp"

namespace nspd {

// ---------------------------------------------------------------- traces

struct TraceRecord {
  long k = 0;
  double F = kInf;     // primal objective at the output iterate
  double G = kInf;     // dual objective at the output dual iterate (+inf if infeasible)
  double gap = kInf;   // F + G, or the game gap
  double feas = 0.0;   // constraint violation, 0 for unconstrained problems
  double time_s = 0.0;
};

struct Trace {
  std::string solver;
  std::vector<TraceRecord> records;

  void write_csv(std::ostream& out) const {
    out << "k,F,G,gap,feas,time_s\n";
    out.precision(17);
    for (const auto& r : records)
      out << r.k << ',' << r.F << ',' << r.G << ',' << r.gap << ',' << r.feas << ',' << r.time_s << '\n';
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path + " for writing");
    write_csv(out);
  }

  static Trace read_csv(std::istream& in) {
    Trace t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("k,F,G,gap,feas,time_s", 0) != 0)
      throw InvalidInput("trace file: missing header k,F,G,gap,feas,time_s");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(ss, cell, ',')) v.push_back(parse(cell));
      if (v.size() != 6) throw InvalidInput("trace file: expected 6 columns in '" + line + "'");
      t.records.push_back({static_cast<long>(v[0]), v[1], v[2], v[3], v[4], v[5]});
    }
    return t;
  }

 private:
  static double parse(const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan" || s == "-nan") return std::nan("");
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw InvalidInput("trace file: cannot parse '" + s + "'");
    }
  }
};

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// ------------------------------------------------------- objective values

inline double primal_value(const CompositeProblem& P, const Vector& x) {
  return P.f.value(x) + P.g.value(P.K.apply(x));
}

// G(y) = f^*(-K^T y) + g^*(y)
inline double dual_value(const CompositeProblem& P, const Vector& y) {
  if (!P.f.has_conjugate() || !P.g.has_conjugate())
    throw UnsupportedMetric("dual_value: conjugate of " + P.f.name + " or " + P.g.name + " unavailable");
  return P.f.conjugate_value(-P.K.adjoint_apply(y)) + P.g.conjugate_value(y);
}

// Scales y radially into dom G before evaluating it, so -G is a valid lower
// bound on F*. Returns {G(a y), a}.
inline std::pair<double, double> restored_dual_value(const CompositeProblem& P, const Vector& y) {
  if (!P.f.has_conjugate() || !P.g.has_conjugate())
    throw UnsupportedMetric("restored_dual_value: conjugates unavailable");
  const Vector s = -P.K.adjoint_apply(y);
  double a = 1.0;
  if (P.f.conjugate_domain_scale) a = std::min(a, P.f.conjugate_domain_scale(s));
  if (P.g.conjugate_domain_scale) a = std::min(a, P.g.conjugate_domain_scale(y));
  // Shrink by a hair so boundary points are not rejected by the feasibility tolerance.
  if (a < 1.0) a *= 1.0 - 1e-15;
  return {P.f.conjugate_value(a * s) + P.g.conjugate_value(a * y), a};
}

// L(x, y) = f(x) + <Kx, y> - g^*(y)
inline double lagrangian(const CompositeProblem& P, const Vector& x, const Vector& y) {
  if (!P.g.has_conjugate()) throw UnsupportedMetric("lagrangian: conjugate of g unavailable");
  return P.f.value(x) + P.K.apply(x).dot(y) - P.g.conjugate_value(y);
}

// max_i (Kx)_i - min_j (K^T y)_j for x, y on their simplices.
inline double game_gap(const LinearMap& K, const Vector& x, const Vector& y) {
  if (x.size() != K.cols() || y.size() != K.rows()) throw InvalidInput("game_gap: dimension mismatch");
  if (!in_simplex(x) || !in_simplex(y)) throw InvalidInput("game_gap: iterate is off the simplex");
  return K.apply(x).maxCoeff() - K.adjoint_apply(y).minCoeff();
}

inline TraceRecord evaluate(const CompositeProblem& P, long k, const Vector& x, const Vector& y,
                            double time_s = 0.0) {
  TraceRecord r;
  r.k = k;
  r.time_s = time_s;
  r.F = primal_value(P, x);
  r.G = (P.f.has_conjugate() && P.g.has_conjugate()) ? dual_value(P, y) : kInf;
  r.gap = r.F + r.G;
  return r;
}

// Objective f + psi, dual value via the folded problem when available, and |Kx - b|.
inline TraceRecord evaluate(const EqConstrainedProblem& P, long k, const Vector& x, const Vector& y,
                            double time_s = 0.0) {
  TraceRecord r;
  r.k = k;
  r.time_s = time_s;
  r.F = P.f.value(x) + P.psi.value(x);
  r.feas = (P.K.apply(x) - P.b).norm();
  if (P.psi.quadratic_form && P.f.has_conjugate()) {
    r.G = dual_value(P.as_composite(), y);
    r.gap = r.F + r.G;
  }
  return r;
}

inline TraceRecord evaluate(const SemiStrongProblem& P, long k, const Vector& x, const Vector& w,
                            const Vector& y, double time_s = 0.0) {
  TraceRecord r;
  r.k = k;
  r.time_s = time_s;
  r.F = P.f.value(x) + P.psi.value(w);
  r.feas = (P.K.apply(x) + P.B.apply(w) - P.b).norm();
  if (P.f.has_conjugate() && P.psi.has_conjugate()) {
    // G(y) = f^*(-K^T y) + psi^*(-B^T y) + <b, y>
    r.G = P.f.conjugate_value(-P.K.adjoint_apply(y)) + P.psi.conjugate_value(-P.B.adjoint_apply(y)) +
          P.b.dot(y);
    r.gap = r.F + r.G;
  }
  return r;
}

inline TraceRecord evaluate(const MatrixGame& G, long k, const Vector& x, const Vector& y,
                            double time_s = 0.0) {
  TraceRecord r;
  r.k = k;
  r.time_s = time_s;
  r.F = G.K.apply(x).maxCoeff();
  r.G = -G.K.adjoint_apply(y).minCoeff();
  r.gap = game_gap(G.K, x, y);
  return r;
}

// ------------------------------------------------------------ certificates

// bound(k) = constant / (k + shift)^rate, checked with additive slack
// 1e-6 (1 + constant).
struct Certificate {
  std::string theorem;
  std::string quantity;  // what the bound controls, e.g. "F(x^k) - F*"
  double constant = 0.0;
  double rate = 1.0;
  double shift = 0.0;
  long k_min = 1;
  std::map<std::string, double> inputs;
  std::string reference_source;

  double bound_at(long k) const {
    return constant / std::pow(static_cast<double>(k) + shift, rate);
  }
  double slack() const { return 1e-6 * (1.0 + constant); }
};

struct CertificateCheck {
  bool passed = true;
  long checked = 0;
  long violations = 0;
  long first_violation_k = -1;
  double worst_ratio = 0.0;  // max value / bound
};

// values[i] is the controlled quantity at iteration ks[i].
inline CertificateCheck check_certificate(const Certificate& c, const std::vector<long>& ks,
                                          const std::vector<double>& values) {
  if (ks.size() != values.size()) throw InvalidInput("check_certificate: size mismatch");
  CertificateCheck out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < c.k_min) continue;
    const double b = c.bound_at(ks[i]);
    ++out.checked;
    out.worst_ratio = std::max(out.worst_ratio, values[i] / b);
    if (!(values[i] <= b + c.slack())) {
      ++out.violations;
      if (out.first_violation_k < 0) out.first_violation_k = ks[i];
    }
  }
  out.passed = out.violations == 0;
  return out;
}

inline nlohmann::json to_json(const Certificate& c) {
  return {{"theorem", c.theorem}, {"quantity", c.quantity}, {"constant", c.constant},
          {"rate", c.rate},       {"shift", c.shift},       {"k_min", c.k_min},
          {"inputs", c.inputs},   {"reference_source", c.reference_source}};
}

inline nlohmann::json to_json(const CertificateCheck& r) {
  return {{"passed", r.passed},
          {"checked", r.checked},
          {"violations", r.violations},
          {"first_violation_k", r.first_violation_k},
          {"worst_ratio", r.worst_ratio}};
}

inline Certificate certificate_from_json(const nlohmann::json& j) {
  Certificate c;
  c.theorem = j.at("theorem").get<std::string>();
  c.quantity = j.value("quantity", "");
  c.constant = j.at("constant").get<double>();
  c.rate = j.at("rate").get<double>();
  c.shift = j.at("shift").get<double>();
  c.k_min = j.value("k_min", 1L);
  c.inputs = j.value("inputs", std::map<std::string, double>{});
  c.reference_source = j.value("reference_source", "");
  return c;
}

// ---- bound constants. x, y below are the comparison point (a saddle point
// for the primal-residual forms).

// General convex, c = 1: L(x^k, y) - L(x, ybar^k) <= [rho0|K|^2|x0-x|^2/gamma + |y0-y|^2/((1-gamma)rho0)] / (2k).
inline double bound_general_c1(const Vector& x0, const Vector& y0, const Vector& x, const Vector& y,
                          double rho0, double gamma, double norm_K, long k) {
  if (k < 1) throw InvalidInput("bound_general_c1: k must be >= 1");
  const double C = rho0 * norm_K * norm_K * (x0 - x).squaredNorm() / gamma +
                   (y0 - y).squaredNorm() / ((1.0 - gamma) * rho0);
  return C / (2.0 * static_cast<double>(k));
}

// Primal residual F(x^k) - F* with D_g = |y0| + M_g in place of |y0 - y|.
inline Certificate certificate_general_c1(const Vector& x0, const Vector& y0, const Vector& x_star,
                                     double M_g, double rho0, double gamma, double norm_K) {
  Certificate c;
  c.theorem = "general_convex_c1";
  c.quantity = "F(x^k) - F*";
  const double Dg = y0.norm() + M_g;
  c.constant = (rho0 * norm_K * norm_K * (x0 - x_star).squaredNorm() / gamma +
                Dg * Dg / ((1.0 - gamma) * rho0)) / 2.0;
  c.rate = 1.0;
  c.shift = 0.0;
  c.k_min = 1;
  c.inputs = {{"rho0", rho0}, {"gamma", gamma}, {"norm_K", norm_K}, {"M_g", M_g},
              {"dist_x0", (x0 - x_star).norm()}, {"D_g", Dg}};
  return c;
}

// General convex, c > 1: R0^2.
inline double bound_general_R0(double F0_minus_Fstar, const Vector& x0, const Vector& y0,
                             const Vector& x_star, const Vector& y_star, double rho0, double gamma,
                             double norm_K, double c) {
  return (c - 1.0) * F0_minus_Fstar +
         0.5 * c * (rho0 * norm_K * norm_K * (x0 - x_star).squaredNorm() / gamma +
                    (y0 - y_star).squaredNorm() / ((1.0 - gamma) * rho0));
}

inline double bound_general_R1(double R0sq, double y_star_norm, double M_g, double rho0, double c) {
  return R0sq + std::sqrt(2.0 * c / rho0) * (y_star_norm + M_g) * std::sqrt(R0sq);
}

inline Certificate certificate_general_c(double R1sq, double c_param) {
  Certificate c;
  c.theorem = "general_convex_c_gt_1";
  c.quantity = "F(x^k) - F*";
  c.constant = R1sq;
  c.rate = 1.0;
  c.shift = c_param - 1.0;
  c.k_min = 0;
  c.inputs = {{"R1_sq", R1sq}, {"c", c_param}};
  return c;
}

// Strongly convex, Case 1: [rho0|K|^2|x0-x|^2/Gamma + |y0-y|^2/((1-gamma)rho0)] * 2/(k+1)^2.
inline double bound_strong_case1(const Vector& x0, const Vector& y0, const Vector& x, const Vector& y,
                          double rho0, double gamma, double norm_K, long k) {
  const double Gam = 2.0 - 1.0 / gamma;
  const double C = rho0 * norm_K * norm_K * (x0 - x).squaredNorm() / Gam +
                   (y0 - y).squaredNorm() / ((1.0 - gamma) * rho0);
  const double kk = static_cast<double>(k) + 1.0;
  return 2.0 * C / (kk * kk);
}

inline Certificate certificate_strong_case1(const Vector& x0, const Vector& y0, const Vector& x_star,
                                     double M_g, double rho0, double gamma, double norm_K) {
  Certificate c;
  c.theorem = "strongly_convex_case1";
  c.quantity = "F(x^k) - F*";
  const double Gam = 2.0 - 1.0 / gamma;
  const double Dg = y0.norm() + M_g;
  c.constant = 2.0 * (rho0 * norm_K * norm_K * (x0 - x_star).squaredNorm() / Gam +
                      Dg * Dg / ((1.0 - gamma) * rho0));
  c.rate = 2.0;
  c.shift = 1.0;
  c.k_min = 1;
  c.inputs = {{"rho0", rho0}, {"gamma", gamma}, {"Gamma", Gam}, {"norm_K", norm_K}, {"M_g", M_g},
              {"dist_x0", (x0 - x_star).norm()}, {"D_g", Dg}};
  return c;
}

// Strongly convex, Case 2: R0^2 and R1^2.
inline double bound_strong_R0(double F0_minus_Fstar, const Vector& x0, const Vector& y0,
                             const Vector& x_star, const Vector& y_star, double rho0, double gamma,
                             double norm_K, double c, double mu_f) {
  const double Gam = 2.0 - 1.0 / gamma;
  return (c - 1.0) * F0_minus_Fstar +
         0.5 * (c - 1.0) * ((c - 1.0) * rho0 * norm_K * norm_K / Gam + c * mu_f) *
             (x0 - x_star).squaredNorm() +
         c * c * (y0 - y_star).squaredNorm() / (2.0 * (1.0 - gamma) * rho0);
}

inline double bound_strong_R1(double R0sq, double y_star_norm, double M_g, double rho0, double c) {
  return R0sq + std::sqrt(2.0 * c * c / rho0) * (y_star_norm + M_g) * std::sqrt(R0sq);
}

inline Certificate certificate_strong_case2(double R1sq, double c_param) {
  Certificate c;
  c.theorem = "strongly_convex_case2";
  c.quantity = "F(x^k) - F*";
  c.constant = R1sq;
  c.rate = 2.0;
  c.shift = c_param - 1.0;
  c.k_min = 0;
  c.inputs = {{"R1_sq", R1sq}, {"c", c_param}};
  return c;
}

// Linearly constrained, c = 1: R0^2, bounding |F - F*| and |Kx - b| by R0^2/(2k).
inline double bound_constrained(const Vector& x0, const Vector& y0, const Vector& x_star, const Vector& y_star,
                          double rho0, double gamma, double norm_K, double L_psi) {
  const double t = 2.0 * y_star.norm() + y0.norm() + 1.0;
  return (rho0 * norm_K * norm_K + gamma * L_psi) / gamma * (x0 - x_star).squaredNorm() +
         t * t / ((1.0 - gamma) * rho0);
}

inline Certificate certificate_constrained(double R0sq, const std::string& quantity) {
  Certificate c;
  c.theorem = "constrained_c1";
  c.quantity = quantity;
  c.constant = R0sq / 2.0;
  c.rate = 1.0;
  c.shift = 0.0;
  c.k_min = 1;
  c.inputs = {{"R0_sq", R0sq}};
  return c;
}

// Semi-strongly convex, Case 1: R0^2, bounding |F - F*| and |Kx + Bw - b| by 2 R0^2/(k+1)^2.
inline double bound_semi_strong(const Vector& x0, const Vector& y0, const Vector& w0, const Vector& x_star,
                          const Vector& y_star, const Vector& w_star, double rho0, double gamma,
                          double norm_K, double nu0) {
  const double Gam = 2.0 - 1.0 / gamma;
  const double t = 2.0 * y_star.norm() + y0.norm() + 1.0;
  return rho0 * norm_K * norm_K * (x0 - x_star).squaredNorm() / Gam + nu0 * (w0 - w_star).squaredNorm() +
         t * t / (rho0 * (1.0 - gamma));
}

inline Certificate certificate_semi_strong(double R0sq, const std::string& quantity) {
  Certificate c;
  c.theorem = "semi_strong_case1";
  c.quantity = quantity;
  c.constant = 2.0 * R0sq;
  c.rate = 2.0;
  c.shift = 1.0;
  c.k_min = 1;
  c.inputs = {{"R0_sq", R0sq}};
  return c;
}

// ----------------------------------------------------------------- slopes

// Least-squares slope of log(value) against log(k) over k in [k_lo, k_hi];
// non-positive and non-finite values are dropped.
inline double rate_slope(const std::vector<long>& ks, const std::vector<double>& values, long k_lo,
                         long k_hi) {
  if (ks.size() != values.size()) throw InvalidInput("rate_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < k_lo || ks[i] > k_hi || ks[i] <= 0) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    const double lx = std::log(static_cast<double>(ks[i])), ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 10) throw InvalidInput("rate_slope: fewer than 10 usable points in the window");
  const double md = static_cast<double>(m);
  const double den = sxx - sx * sx / md;
  if (!(den > 0.0)) throw InvalidInput("rate_slope: degenerate window");
  return (sxy - sx * sy / md) / den;
}

inline double rate_slope(const Trace& t, const std::function<double(const TraceRecord&)>& metric,
                         long k_lo, long k_hi) {
  std::vector<long> ks;
  std::vector<double> vs;
  for (const auto& r : t.records) {
    ks.push_back(r.k);
    vs.push_back(metric(r));
  }
  return rate_slope(ks, vs, k_lo, k_hi);
}

// (F - F*) / max(1, |F*|)
inline double relative_residual(double F, double F_star) {
  return (F - F_star) / std::max(1.0, std::abs(F_star));
}

}  // namespace nspd
