#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace nspd;
using nspd::test::random_vector;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}
}  // namespace

TEST(Prox, ConjugateOfL1IsClamp) {
  EXPECT_TRUE(conjugate_prox(l1_prox(1.0), vec({2, -0.5}), 1.0).isApprox(vec({1, -0.5})));
}

TEST(Prox, ShiftedL1HandExample) {
  EXPECT_TRUE(l1_shifted_prox(vec({1, 1})).prox(vec({3, 1}), 1.0).isApprox(vec({2, 1})));
}

TEST(Prox, ElasticHandExample) {
  const Vector u = elastic_prox(0.05, 0.1).prox(vec({1.05, 0}), 1.0);
  EXPECT_NEAR(u[0], 1.0 / 1.1, 1e-15);
  EXPECT_EQ(u[1], 0.0);
}

TEST(Prox, PointIndicatorConjugate) {
  EXPECT_TRUE(conjugate_prox(point_indicator(vec({1, 2})), vec({5, 5}), 2.0).isApprox(vec({3, 1})));
}

TEST(Prox, SimplexHandExample) {
  EXPECT_TRUE(simplex_prox(2).prox(vec({2, 0}), 0.3).isApprox(vec({1, 0})));
  // Against the bisection oracle on random inputs.
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector v = random_vector(rng, 9, 3.0);
    const Vector u = project_simplex(v);
    EXPECT_TRUE(in_simplex(u));
    EXPECT_LE((u - nspd::test::simplex_projection_oracle(v)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Prox, QuadraticShiftHandExample) {
  EXPECT_TRUE(prox_quadratic_shift(l1_prox(1.0), vec({1, 1}), 1.0, vec({1, 0})).isZero());
}

TEST(Prox, MoreauRoundTripAllBuiltins) {
  for (const auto& pc : nspd::test::builtin_cases(3)) {
    SCOPED_TRACE(pc.name);
    EXPECT_LE(nspd::test::moreau_roundtrip_error(pc, 100, 17), 1e-10);
  }
}

TEST(Prox, MoreauRoundTripFixedRhos) {
  Rng rng(4);
  for (const auto& pc : nspd::test::builtin_cases(5))
    for (double rho : {0.1, 1.0, 10.0}) {
      SCOPED_TRACE(pc.name);
      const Vector x = random_vector(rng, pc.dim);
      const Vector lhs = pc.h.prox(x, 1.0 / rho) + conjugate_prox(pc.h, rho * x, rho) / rho;
      EXPECT_LE((lhs - x).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(Prox, CharacterizationAgainstProbes) {
  Rng rng(6);
  for (const auto& pc : nspd::test::builtin_cases(7)) {
    SCOPED_TRACE(pc.name);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector v = random_vector(rng, pc.dim, 2.0);
      const double t = std::pow(10.0, rng.uniform(-1.5, 1.0));
      const Vector u = pc.h.prox(v, t);
      const double at_u = pc.h.value(u) + (u - v).squaredNorm() / (2.0 * t);
      ASSERT_TRUE(std::isfinite(at_u));
      for (int probe = 0; probe < 50; ++probe) {
        // Probes near u, projected onto dom h for the indicator-type functions.
        Vector w = u + random_vector(rng, pc.dim, 0.3);
        if (pc.name == "simplex") w = project_simplex(w);
        if (pc.name == "point_indicator") w = u;
        const double at_w = pc.h.value(w) + (w - v).squaredNorm() / (2.0 * t);
        EXPECT_GE(at_w, at_u - 1e-9);
      }
    }
  }
}

TEST(Prox, FirmlyNonexpansive) {
  Rng rng(8);
  for (const auto& pc : nspd::test::builtin_cases(9))
    for (int trial = 0; trial < 30; ++trial) {
      SCOPED_TRACE(pc.name);
      const Vector v1 = random_vector(rng, pc.dim, 2.0), v2 = random_vector(rng, pc.dim, 2.0);
      const double t = std::pow(10.0, rng.uniform(-1.0, 1.0));
      const Vector p1 = pc.h.prox(v1, t), p2 = pc.h.prox(v2, t);
      EXPECT_LE((p1 - p2).norm(), (v1 - v2).norm() + 1e-10);
      EXPECT_GE((p1 - p2).dot(v1 - v2), (p1 - p2).squaredNorm() - 1e-10);
    }
}

TEST(Prox, StrongConvexityMidpoint) {
  Rng rng(10);
  for (const auto& pc : nspd::test::builtin_cases(11)) {
    if (!(pc.h.mu > 0.0)) continue;
    SCOPED_TRACE(pc.name);
    auto reduced = [&](const Vector& x) { return pc.h.value(x) - 0.5 * pc.h.mu * x.squaredNorm(); };
    for (int trial = 0; trial < 100; ++trial) {
      const Vector a = random_vector(rng, pc.dim, 3.0), b = random_vector(rng, pc.dim, 3.0);
      EXPECT_LE(reduced(0.5 * (a + b)), 0.5 * (reduced(a) + reduced(b)) + 1e-9);
    }
  }
}

TEST(Prox, FenchelYoungEqualityAtProx) {
  Rng rng(12);
  for (const auto& pc : nspd::test::builtin_cases(13)) {
    SCOPED_TRACE(pc.name);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector v = random_vector(rng, pc.dim, 2.0);
      const double t = std::pow(10.0, rng.uniform(-1.0, 1.0));
      const Vector u = pc.h.prox(v, t);
      const Vector s = (v - u) / t;  // in the subdifferential at u
      const double fy = pc.h.value(u) + pc.h.conjugate_value(s) - u.dot(s);
      EXPECT_NEAR(fy, 0.0, 1e-8 * std::max(1.0, std::abs(u.dot(s))));
    }
  }
}

TEST(Prox, ConjugateDomainScaleLandsInDomain) {
  Rng rng(14);
  for (const auto& h : {l1_prox(0.5), l1_shifted_prox(Vector::Ones(5))}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector s = random_vector(rng, 5, 3.0);
      const double a = h.conjugate_domain_scale(s);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
      EXPECT_TRUE(std::isfinite(h.conjugate_value(a * s)));
    }
  }
}

TEST(Prox, TranslateAndAddQuadratic) {
  Rng rng(15);
  const Vector b = random_vector(rng, 4);
  const ProxFunction t = translate(l1_prox(1.0), b);
  const Vector v = random_vector(rng, 4);
  EXPECT_TRUE(t.prox(v, 0.5).isApprox(b + soft_threshold(v - b, 0.5)));
  EXPECT_NEAR(t.value(v), (v - b).lpNorm<1>(), 1e-14);

  const ProxFunction q = add_quadratic(zero_function(), 2.0, b);
  EXPECT_TRUE(q.prox(v, 0.25).isApprox(quadratic(2.0, b).prox(v, 0.25)));
  EXPECT_EQ(q.mu, 2.0);
}

TEST(Prox, GradientCheck) {
  Rng rng(16);
  std::vector<Vector> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(random_vector(rng, 5));
  EXPECT_LE(gradient_check(quadratic(3.0, random_vector(rng, 5)), pts), 1e-7);
  ProxFunction bad = quadratic(1.0);
  bad.gradient = [](const Vector& x) { return (2.0 * x).eval(); };
  EXPECT_GT(gradient_check(bad, pts), 1e-2);
  EXPECT_THROW(gradient_check(l1_prox(1.0), pts), InvalidInput);
}

TEST(Prox, InvalidArguments) {
  EXPECT_THROW(l1_prox(1.0).prox(Vector::Ones(2), 0.0), InvalidInput);
  EXPECT_THROW(conjugate_prox(l1_prox(1.0), Vector::Ones(2), -1.0), InvalidInput);
  EXPECT_THROW(quadratic(0.0), InvalidInput);
  EXPECT_THROW(elastic_prox(1.0, 0.0), InvalidInput);
}
