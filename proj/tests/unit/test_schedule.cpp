#include <gtest/gtest.h>

#include <cmath>

#include "asgd/schedule.hpp"

using namespace asgd;

namespace {

BoundParams params(double lambda0, double lambda1, double tr, double d0, Schedule s) {
  return BoundParams{lambda0, lambda1, tr, d0, s};
}

}  // namespace

TEST(Schedule, RateExamples) {
  const Schedule s = Schedule::make(1.0, 0.02, 2.0 / 3.0);
  EXPECT_EQ(rate(s, 0), 1.0);
  // 2^(-2/3), mpmath
  EXPECT_NEAR(rate(s, 50), 0.629960524947436582384, 1e-15);
  const Schedule flat = Schedule::make(0.3, 0.0, 0.75);
  EXPECT_EQ(rate(flat, 1), 0.3);
  EXPECT_EQ(rate(flat, 1000000), 0.3);
}

TEST(Schedule, CEqualsOneMatchesClassicalForm) {
  const double g0 = 0.5, l0 = 0.01;
  const Schedule s = Schedule::make(g0, l0, 1.0);
  for (std::uint64_t t : {1u, 10u, 1000u, 123456u})
    EXPECT_NEAR(rate(s, t), g0 / (1.0 + g0 * l0 * static_cast<double>(t)), 1e-16);
}

TEST(Schedule, MakeValidates) {
  EXPECT_THROW(Schedule::make(0.0, 0.1, 0.5), contract_error);
  EXPECT_THROW(Schedule::make(1.0, -0.1, 0.5), contract_error);
  EXPECT_THROW(Schedule::make(1.0, 0.1, 1.5), contract_error);
}

TEST(BoundParams, C0Examples) {
  EXPECT_EQ(c0(params(0.5, 1, 0, 0, Schedule::make(1, 0, 0.5))), 0.0);
  EXPECT_EQ(c0(params(0.5, 1, 0, 0, Schedule::make(1, 0.3, 0.0))), 0.0);
  // a·c(1+acγ0)/(λ0 − max(0,2c−1)a), mpmath: 1.0133333…
  EXPECT_NEAR(c0(params(0.02, 1, 0, 0, Schedule::make(1, 0.02, 2.0 / 3.0))), 1.01333333333333333333, 1e-14);
  // c < 1/2 drops the denominator correction: 3·¼·(1+3·¼·½)/½ = 2.0625
  EXPECT_NEAR(c0(params(0.5, 2, 0, 0, Schedule::make(0.5, 3.0, 0.25))), 2.0625, 1e-15);
}

TEST(BoundParams, KappaAndAdmissibility) {
  const BoundParams p = params(0.02, 1, 0, 0, Schedule::make(1, 0.02, 2.0 / 3.0));
  EXPECT_NEAR(p.kappa(), 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(p.admissible());

  const BoundParams step = params(0.02, 2, 0, 0, Schedule::make(1, 0.02, 2.0 / 3.0));
  EXPECT_EQ(step.violation(), "gamma0 * lambda1 <= 1");
  EXPECT_THROW(c0(step), contract_error);
  EXPECT_NO_THROW(c0(step, unchecked));

  const BoundParams growth = params(0.01, 1, 0, 0, Schedule::make(1, 0.05, 1.0));
  EXPECT_EQ(growth.violation(), "(2c - 1) * a < lambda0");
  EXPECT_THROW(theorem1_bound(growth, 10), contract_error);
}

TEST(Theorem1Bound, FrozenValues) {
  const BoundParams p = params(0.02, 1, 3.0, 2.0, Schedule::make(1, 0.02, 2.0 / 3.0));
  // mpmath, 30 digits
  EXPECT_NEAR(theorem1_bound(p, 1), 24.7574196049761174308, 1e-12);
  EXPECT_NEAR(theorem1_bound(p, 1000), 7.98859909867493569671, 1e-12);
}

TEST(Theorem1Bound, DegenerateTermsVanish) {
  const BoundParams p = params(0.1, 1, 4.5, 0.0, Schedule::make(1, 0.0, 0.5));
  EXPECT_EQ(theorem1_bound(p, 1), 4.5);
  EXPECT_EQ(theorem1_bound(p, 1000000), 4.5);
}

TEST(Theorem1Bound, ConvergesToLeadingTerm) {
  const BoundParams p = params(0.02, 1, 3.0, 2.0, Schedule::make(1, 0.02, 2.0 / 3.0));
  double prev = theorem1_bound(p, 100);
  for (std::uint64_t t = 1000; t <= 1000000000; t *= 10) {
    const double b = theorem1_bound(p, t);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_GT(prev, 3.0);
  // With c = 1/2 and a = λ0 = 0.5 the O(t^(c−1)) tail is below 1e-3 by t = 1e9.
  const BoundParams fast = params(0.5, 1, 3.0, 2.0, Schedule::make(1, 0.5, 0.5));
  EXPECT_NEAR(theorem1_bound(fast, 1000000000) / 3.0, 1.0, 1e-3);
}

TEST(Theorem1Bound, RejectsCZeroAndTZero) {
  EXPECT_THROW(theorem1_bound(params(0.1, 1, 1, 1, Schedule::make(1, 0.1, 0.0)), 5), contract_error);
  EXPECT_THROW(theorem1_bound(params(0.1, 1, 1, 1, Schedule::make(1, 0.1, 0.5)), 0), contract_error);
}

TEST(RecommendedSchedule, Examples) {
  EXPECT_EQ(recommended_schedule(LossKind::squared, 1.0, 0.01), Schedule::make(1.0, 0.01, 2.0 / 3.0));
  EXPECT_EQ(recommended_schedule(LossKind::logistic, 4.0, 1e-5), Schedule::make(0.25, 1e-5, 0.75));
  const Schedule cov = recommended_schedule(LossKind::squared_hinge, 6.8, 1e-6);
  EXPECT_NEAR(cov.gamma0, 0.147058823529411764706, 1e-16);
  EXPECT_EQ(cov.a, 1e-6);
  EXPECT_EQ(cov.c, 0.75);
  EXPECT_THROW(recommended_schedule(LossKind::squared, 0.0, 0.1), contract_error);
  EXPECT_THROW(recommended_schedule(LossKind::squared, 1.0, 0.0), contract_error);
}
