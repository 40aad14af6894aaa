#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nspd/errors.hpp"
#include "nspd/linop.hpp"

namespace nspd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-9;

// A proper closed convex function given through its proximal operator.
// prox(v, t) returns argmin_u h(u) + |u - v|^2 / (2t).
struct ProxFunction {
  std::string name;
  Eigen::Index dim = 0;  // 0: any dimension
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&, double)> prox;
  double mu = 0.0;                   // strong convexity modulus
  std::optional<double> lipschitz;   // M_h with |subgradient| <= M_h on dom h
  std::optional<double> smooth_lipschitz;
  std::function<Vector(const Vector&)> gradient;          // empty when nonsmooth
  std::function<double(const Vector&)> conjugate_value;   // h^*, empty when unknown
  // Largest a in [0,1] with a*s in dom h^*; domains here are star-shaped about 0.
  std::function<double(const Vector&)> conjugate_domain_scale;
  // (sigma, center) when h = (sigma/2)|x - center|^2 exactly.
  std::optional<std::pair<double, Vector>> quadratic_form;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_conjugate() const { return static_cast<bool>(conjugate_value); }

  void check_dim(const Vector& v, const char* where) const {
    if (dim != 0 && v.size() != dim)
      throw InvalidInput(std::string(where) + ": " + name + " expects dimension " +
                         std::to_string(dim) + ", got " + std::to_string(v.size()));
  }
};

inline Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) { return std::copysign(std::max(std::abs(a) - t, 0.0), a); });
}

// Euclidean projection onto the unit simplex by sort-and-threshold.
inline Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw InvalidInput("project_simplex: empty vector");
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += s[static_cast<std::size_t>(i)];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

inline bool in_simplex(const Vector& v, double tol = kFeasTol) {
  return v.size() > 0 && v.minCoeff() >= -tol && std::abs(v.sum() - 1.0) <= tol;
}

// prox of the conjugate via the Moreau identity: prox_{rho h^*}(v) = v - rho prox_{h/rho}(v/rho).
inline Vector conjugate_prox(const ProxFunction& h, const Vector& v, double rho) {
  if (!(rho > 0.0)) throw InvalidInput("conjugate_prox: rho must be positive");
  return v - rho * h.prox(v / rho, 1.0 / rho);
}

// argmin_u h(u) + <linear, u> + |u - v|^2 / (2 step)
inline Vector prox_quadratic_shift(const ProxFunction& h, const Vector& v, double step,
                                   const Vector& linear) {
  if (linear.size() != v.size()) throw InvalidInput("prox_quadratic_shift: size mismatch");
  return h.prox(v - step * linear, step);
}

namespace detail {
inline void require_positive_step(double t) {
  if (!(t > 0.0)) throw InvalidInput("prox: step must be positive");
}
inline double radial_scale(double norm, double radius) {
  return norm <= radius ? 1.0 : radius / norm;
}
}  // namespace detail

inline ProxFunction zero_function(Eigen::Index dim = 0) {
  ProxFunction h;
  h.name = "zero";
  h.dim = dim;
  h.value = [](const Vector&) { return 0.0; };
  h.prox = [](const Vector& v, double t) {
    detail::require_positive_step(t);
    return v;
  };
  h.lipschitz = 0.0;
  h.smooth_lipschitz = 0.0;
  h.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  h.conjugate_value = [](const Vector& s) {
    return s.size() == 0 || s.lpNorm<Eigen::Infinity>() <= kFeasTol ? 0.0 : kInf;
  };
  h.conjugate_domain_scale = [](const Vector& s) {
    return s.size() == 0 || s.lpNorm<Eigen::Infinity>() <= kFeasTol ? 1.0 : 0.0;
  };
  return h;
}

// (sigma/2) |x - center|^2; an empty center means the origin.
inline ProxFunction quadratic(double sigma = 1.0, Vector center = Vector()) {
  if (!(sigma > 0.0)) throw InvalidInput("quadratic: sigma must be positive");
  ProxFunction h;
  h.name = "quadratic";
  h.dim = center.size();
  auto c = [center](Eigen::Index n) { return center.size() ? center : Vector::Zero(n).eval(); };
  h.value = [sigma, c](const Vector& x) { return 0.5 * sigma * (x - c(x.size())).squaredNorm(); };
  h.prox = [sigma, c](const Vector& v, double t) {
    detail::require_positive_step(t);
    return ((v + t * sigma * c(v.size())) / (1.0 + t * sigma)).eval();
  };
  h.mu = sigma;
  h.smooth_lipschitz = sigma;
  h.gradient = [sigma, c](const Vector& x) { return (sigma * (x - c(x.size()))).eval(); };
  h.conjugate_value = [sigma, c](const Vector& s) {
    return s.dot(c(s.size())) + s.squaredNorm() / (2.0 * sigma);
  };
  h.conjugate_domain_scale = [](const Vector&) { return 1.0; };
  h.quadratic_form = std::make_pair(sigma, center);
  return h;
}

// lambda |x|_1
inline ProxFunction l1_prox(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidInput("l1_prox: lambda must be nonnegative");
  ProxFunction h;
  h.name = "l1";
  h.value = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
  h.prox = [lambda](const Vector& v, double t) {
    detail::require_positive_step(t);
    return soft_threshold(v, t * lambda);
  };
  h.conjugate_value = [lambda](const Vector& s) {
    return s.lpNorm<Eigen::Infinity>() <= lambda + kFeasTol ? 0.0 : kInf;
  };
  h.conjugate_domain_scale = [lambda](const Vector& s) {
    return detail::radial_scale(s.lpNorm<Eigen::Infinity>(), lambda);
  };
  return h;
}

// |r - b|_1, the LAD loss.
inline ProxFunction l1_shifted_prox(Vector b) {
  ProxFunction h;
  h.name = "l1_shifted";
  h.dim = b.size();
  h.value = [b](const Vector& r) { return (r - b).lpNorm<1>(); };
  h.prox = [b](const Vector& v, double t) {
    detail::require_positive_step(t);
    return (b + soft_threshold(v - b, t)).eval();
  };
  h.lipschitz = std::sqrt(static_cast<double>(b.size()));
  h.conjugate_value = [b](const Vector& y) {
    return y.lpNorm<Eigen::Infinity>() <= 1.0 + kFeasTol ? b.dot(y) : kInf;
  };
  h.conjugate_domain_scale = [](const Vector& y) {
    return detail::radial_scale(y.lpNorm<Eigen::Infinity>(), 1.0);
  };
  return h;
}

// lambda |x|_1 + (mu/2) |x|^2
inline ProxFunction elastic_prox(double lambda, double mu) {
  if (!(lambda >= 0.0) || !(mu > 0.0)) throw InvalidInput("elastic_prox: need lambda >= 0, mu > 0");
  ProxFunction h;
  h.name = "elastic";
  h.value = [lambda, mu](const Vector& x) {
    return lambda * x.lpNorm<1>() + 0.5 * mu * x.squaredNorm();
  };
  h.prox = [lambda, mu](const Vector& v, double t) {
    detail::require_positive_step(t);
    return (soft_threshold(v, t * lambda) / (1.0 + t * mu)).eval();
  };
  h.mu = mu;
  h.conjugate_value = [lambda, mu](const Vector& s) {
    return (s.array().abs() - lambda).max(0.0).square().sum() / (2.0 * mu);
  };
  h.conjugate_domain_scale = [](const Vector&) { return 1.0; };
  return h;
}

// Indicator of {b}.
inline ProxFunction point_indicator(Vector b) {
  ProxFunction h;
  h.name = "point_indicator";
  h.dim = b.size();
  h.value = [b](const Vector& x) {
    return (x - b).lpNorm<Eigen::Infinity>() <= kFeasTol ? 0.0 : kInf;
  };
  h.prox = [b](const Vector& v, double t) {
    detail::require_positive_step(t);
    if (v.size() != b.size()) throw InvalidInput("point_indicator: size mismatch");
    return b;
  };
  h.conjugate_value = [b](const Vector& y) { return b.dot(y); };
  h.conjugate_domain_scale = [](const Vector&) { return 1.0; };
  return h;
}

// Indicator of the unit simplex in R^dim.
inline ProxFunction simplex_prox(Eigen::Index dim) {
  ProxFunction h;
  h.name = "simplex";
  h.dim = dim;
  h.value = [](const Vector& x) { return in_simplex(x) ? 0.0 : kInf; };
  h.prox = [](const Vector& v, double t) {
    detail::require_positive_step(t);
    return project_simplex(v);
  };
  h.conjugate_value = [](const Vector& s) { return s.maxCoeff(); };
  h.conjugate_domain_scale = [](const Vector&) { return 1.0; };
  return h;
}

// max_i r_i, the support function of the simplex; its conjugate is the simplex indicator.
inline ProxFunction simplex_support(Eigen::Index dim) {
  ProxFunction h;
  h.name = "simplex_support";
  h.dim = dim;
  h.value = [](const Vector& r) { return r.maxCoeff(); };
  h.prox = [](const Vector& v, double t) {
    detail::require_positive_step(t);
    return (v - t * project_simplex(v / t)).eval();
  };
  h.lipschitz = 1.0;
  h.conjugate_value = [](const Vector& y) { return in_simplex(y) ? 0.0 : kInf; };
  return h;
}

// h + (sigma/2)|x - center|^2, with the prox and conjugate derived from h's prox.
inline ProxFunction add_quadratic(ProxFunction h, double sigma, Vector center = Vector()) {
  if (!(sigma > 0.0)) throw InvalidInput("add_quadratic: sigma must be positive");
  ProxFunction out;
  out.name = h.name + "+quadratic";
  out.dim = h.dim ? h.dim : center.size();
  auto c = [center](Eigen::Index n) { return center.size() ? center : Vector::Zero(n).eval(); };
  out.value = [h, sigma, c](const Vector& x) {
    return h.value(x) + 0.5 * sigma * (x - c(x.size())).squaredNorm();
  };
  out.prox = [h, sigma, c](const Vector& v, double t) {
    detail::require_positive_step(t);
    const double d = 1.0 + t * sigma;
    return h.prox((v + t * sigma * c(v.size())) / d, t / d);
  };
  out.mu = h.mu + sigma;
  if (h.smooth_lipschitz) out.smooth_lipschitz = *h.smooth_lipschitz + sigma;
  if (h.gradient)
    out.gradient = [h, sigma, c](const Vector& x) {
      return (h.gradient(x) + sigma * (x - c(x.size()))).eval();
    };
  // sup_x <s,x> - h(x) - (sigma/2)|x-c|^2 is attained at prox_{h/sigma}(c + s/sigma).
  out.conjugate_value = [h, sigma, c](const Vector& s) {
    const Vector cc = c(s.size());
    const Vector x = h.prox(cc + s / sigma, 1.0 / sigma);
    return s.dot(x) - h.value(x) - 0.5 * sigma * (x - cc).squaredNorm();
  };
  out.conjugate_domain_scale = [](const Vector&) { return 1.0; };
  return out;
}

// r -> h(r - b)
inline ProxFunction translate(ProxFunction h, Vector b) {
  ProxFunction out;
  out.name = h.name + "_translated";
  out.dim = b.size();
  out.value = [h, b](const Vector& r) { return h.value(r - b); };
  out.prox = [h, b](const Vector& v, double t) { return (b + h.prox(v - b, t)).eval(); };
  out.mu = h.mu;
  out.lipschitz = h.lipschitz;
  out.smooth_lipschitz = h.smooth_lipschitz;
  if (h.gradient) out.gradient = [h, b](const Vector& r) { return h.gradient(r - b); };
  if (h.conjugate_value)
    out.conjugate_value = [h, b](const Vector& y) { return h.conjugate_value(y) + b.dot(y); };
  out.conjugate_domain_scale = h.conjugate_domain_scale;
  return out;
}

// Central finite-difference check of h.gradient at `points`; returns the worst
// relative error.
inline double gradient_check(const ProxFunction& h, const std::vector<Vector>& points,
                             double step = 1e-6) {
  if (!h.gradient) throw InvalidInput("gradient_check: function has no gradient");
  double worst = 0.0;
  for (const auto& x : points) {
    const Vector g = h.gradient(x);
    Vector fd(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vector xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      fd[i] = (h.value(xp) - h.value(xm)) / (2.0 * step);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

}  // namespace nspd
