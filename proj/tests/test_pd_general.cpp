#include <gtest/gtest.h>

#include "common.hpp"

using namespace nspd;
using nspd::test::random_vector;
using nspd::test::small_lad;

TEST(GeneralSchedule, HandValues) {
  const GeneralSchedule s{1.0, 0.5, 2.0, 1.0, 0.0};
  EXPECT_EQ(schedule_at(s, 0).tau, 1.0);
  EXPECT_EQ(schedule_at(s, 1).tau, 0.5);
  EXPECT_EQ(schedule_at(s, 3).tau, 0.25);
  const StepParams p = schedule_at(s, 1);
  EXPECT_DOUBLE_EQ(p.rho, 4.0);
  EXPECT_DOUBLE_EQ(p.beta, 0.125);
  EXPECT_DOUBLE_EQ(p.eta, 2.0);
}

TEST(GeneralSchedule, Invariants) {
  for (double c : {1.0, 2.0, 3.5})
    for (double L : {0.3, 1.0, 21.6}) {
      const GeneralSchedule s{c, 0.999, 0.02, L, 0.0};
      for (long k = 0; k <= 100000; k += 997) {
        const StepParams p = schedule_at(s, k);
        EXPECT_NEAR(p.rho * p.beta * L * L, s.gamma, 1e-15);
        EXPECT_GT(p.rho, p.eta);
        EXPECT_DOUBLE_EQ(p.tau, c / (static_cast<double>(k) + c));
      }
    }
}

TEST(GeneralSchedule, RejectsBadParameters) {
  EXPECT_THROW(schedule_at(GeneralSchedule{0.5, 0.5, 1.0, 1.0, 0.0}, 0), ConfigError);
  EXPECT_THROW(schedule_at(GeneralSchedule{1.0, 1.0, 1.0, 1.0, 0.0}, 0), ConfigError);
  EXPECT_THROW(schedule_at(GeneralSchedule{1.0, 0.5, 0.0, 1.0, 0.0}, 0), ConfigError);
  EXPECT_THROW(schedule_at(GeneralSchedule{1.0, 0.5, 1.0, 1.0, 0.0}, -1), InvalidInput);
}

TEST(Alg1, InitialState) {
  const CompositeProblem P = small_lad(1, 8, 4);
  Rng rng(2);
  const Vector x0 = random_vector(rng, 4), y0 = random_vector(rng, 8);
  const PDState s = init_pd_state(P.K, x0, y0);
  EXPECT_EQ(s.x_prev, x0);
  EXPECT_EQ(s.x_hat, x0);
  EXPECT_EQ(s.y_tilde_prev, y0);
  EXPECT_EQ(s.y_bar, y0);
  EXPECT_TRUE(s.Kx.isApprox(P.K.apply(x0)));
  EXPECT_THROW(init_pd_state(P.K, y0, x0), InvalidInput);
  const RawState r = init_raw_state(P.K, x0, y0);
  EXPECT_TRUE(r.r.isApprox(P.K.apply(x0)));
}

// The eliminated method against the explicit-r scheme, step by step.
TEST(Alg1, MatchesRawScheme) {
  for (double c : {1.0, 2.0})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const CompositeProblem P = small_lad(seed, 50, 20);
      Rng rng(seed + 100);
      const Vector x0 = random_vector(rng, 20), y0 = random_vector(rng, 50, 0.3);
      const GeneralSchedule sch{c, 0.7, 0.05, P.K.norm(), 0.0};
      PDState a = init_pd_state(P.K, x0, y0);
      RawState r = init_raw_state(P.K, x0, y0);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        a = alg1_step(std::move(a), P, sch);
        r = raw_scheme1_step(std::move(r), P, sch);
        worst = std::max({worst, (a.x - r.x).lpNorm<Eigen::Infinity>(), (a.y_bar - r.y_bar).lpNorm<Eigen::Infinity>()});
      }
      EXPECT_LE(worst, 1e-9) << "c=" << c << " seed=" << seed;
    }
}

TEST(Alg1, MatchesRawSchemeOnGame) {
  Rng rng(9);
  const MatrixGame G{LinearMap::dense(nspd::test::random_matrix(rng, 12, 7))};
  const CompositeProblem P = G.as_composite();
  const Vector x0 = Vector::Constant(7, 1.0 / 7), y0 = Vector::Constant(12, 1.0 / 12);
  const GeneralSchedule sch{2.0, 0.5, 1.0 / P.K.norm(), P.K.norm(), 0.0};
  PDState a = init_pd_state(P.K, x0, y0);
  RawState r = init_raw_state(P.K, x0, y0);
  for (int k = 0; k < 100; ++k) {
    a = alg1_step(std::move(a), P, sch);
    r = raw_scheme1_step(std::move(r), P, sch);
  }
  EXPECT_LE((a.x - r.x).lpNorm<Eigen::Infinity>(), 1e-9);
  EXPECT_LE((a.y_bar - r.y_bar).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Alg1, DualAverageStaysInHullBox) {
  const CompositeProblem P = small_lad(4, 30, 10);
  const GeneralSchedule sch{1.0, 0.5, 0.1, P.K.norm(), 0.0};
  PDState s = init_pd_state(P.K, Vector::Zero(10), Vector::Zero(30));
  Vector lo = s.y, hi = s.y;
  for (int k = 0; k < 200; ++k) {
    s = alg1_step(std::move(s), P, sch);
    lo = lo.cwiseMin(s.y);
    hi = hi.cwiseMax(s.y);
    EXPECT_TRUE(((s.y_bar - lo).array() >= -1e-12).all());
    EXPECT_TRUE(((hi - s.y_bar).array() >= -1e-12).all());
  }
}

TEST(Alg1, DivergenceIsReported) {
  CompositeProblem P = small_lad(5, 6, 3);
  P.f.prox = [](const Vector& v, double) { return Vector::Constant(v.size(), std::nan("")).eval(); };
  const GeneralSchedule sch{1.0, 0.5, 1.0, P.K.norm(), 0.0};
  PDState s = init_pd_state(P.K, Vector::Zero(3), Vector::Zero(6));
  try {
    s = alg1_step(std::move(s), P, sch);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.iteration(), 1);
  }
}

TEST(Alg1, AutoRho0) {
  const Vector x0 = Vector::Zero(2), y0 = Vector::Zero(3);
  const Vector xs = Vector::Ones(2), ys = Vector::Ones(3);
  EXPECT_NEAR(auto_rho0(0.5, 2.0, &x0, &y0, &xs, &ys), 5.0 * std::sqrt(3.0) / (2.0 * std::sqrt(2.0)), 1e-14);
  EXPECT_DOUBLE_EQ(auto_rho0(0.5, 4.0), 0.25);
  EXPECT_DOUBLE_EQ(auto_rho0(0.5, 4.0, &x0, &y0, &x0, &ys), 0.25);
}

TEST(ConstrainedAlg1, HandStep) {
  DenseMatrix k(1, 2);
  k << 1, 1;
  EqConstrainedProblem P{zero_function(2), quadratic(1.0), LinearMap::dense(k), Vector::Ones(1)};
  P.validate();
  const GeneralSchedule sch{1.0, 0.5, 1.0, P.K.norm(), P.L_psi()};
  PDState s = init_pd_state(P.K, Vector::Zero(2), Vector::Zero(1));
  s = constr_alg1_step(std::move(s), P, sch);
  EXPECT_NEAR(s.y[0], -1.0, 1e-15);
  EXPECT_NEAR(s.x[0], 0.2, 1e-12);
  EXPECT_NEAR(s.x[1], 0.2, 1e-12);
}

TEST(ConstrainedAlg1, FeasibilityDecays) {
  Rng rng(21);
  const DenseMatrix k = nspd::test::random_matrix(rng, 20, 40);
  const Vector b = k * random_vector(rng, 40);
  const EqConstrainedProblem P{l1_prox(0.1), quadratic(1.0), LinearMap::dense(k), b};
  const GeneralSchedule sch{1.0, 0.5, 1.0 / P.K.norm(), P.K.norm(), P.L_psi()};
  PDState s = init_pd_state(P.K, Vector::Zero(40), Vector::Zero(20));
  std::vector<long> ks;
  std::vector<double> feas;
  for (int i = 0; i < 5000; ++i) {
    s = constr_alg1_step(std::move(s), P, sch);
    ks.push_back(s.k);
    feas.push_back((s.Kx - b).norm());
  }
  EXPECT_LT(feas.back(), 1e-2 * feas.front());
  EXPECT_LE(rate_slope(ks, feas, 50, 5000), -0.9);
}

TEST(ConstrainedAlg1, ValidateRejectsWrongGradient) {
  ProxFunction psi = quadratic(1.0);
  psi.gradient = [](const Vector& x) { return (3.0 * x).eval(); };
  const EqConstrainedProblem P{zero_function(), psi, LinearMap::identity(3), Vector::Zero(3)};
  EXPECT_THROW(P.validate(), InvalidInput);
  EqConstrainedProblem Q{zero_function(), l1_prox(1.0), LinearMap::identity(3), Vector::Zero(3)};
  EXPECT_THROW(Q.validate(), InvalidInput);
}
