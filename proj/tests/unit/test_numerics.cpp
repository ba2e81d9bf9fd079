#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gda/crra.hpp"
#include "gda/errors.hpp"
#include "gda/numerics.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace gda;
using namespace gda::numerics;
using testing_support::rel_err;

TEST(NormalCdf, SymmetryTailAndOracle) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_GE(std_normal_cdf(8.0), 1.0 - 1e-14);
  EXPECT_NEAR(std_normal_cdf(1.0), oracle::kN1, 1e-15);
}

TEST(NormalCdf, Monotone) {
  double prev = 0.0;
  for (double z = -40.0; z <= 40.0; z += 0.01) {
    const double c = std_normal_cdf(z);
    ASSERT_GE(c, prev) << "z=" << z;
    prev = c;
  }
}

TEST(NormalCdf, RejectsNonFinite) {
  EXPECT_THROW(std_normal_cdf(std::nan("")), DomainError);
  EXPECT_THROW(std_normal_pdf(std::numeric_limits<double>::infinity()), DomainError);
}

TEST(NormalPdf, ValueEvennessDerivative) {
  EXPECT_NEAR(std_normal_pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-16);
  EXPECT_EQ(std_normal_pdf(1.7), std_normal_pdf(-1.7));
  const double h = 1e-5;
  const double fd = (std_normal_pdf(0.5 + h) - std_normal_pdf(0.5 - h)) / (2 * h);
  EXPECT_NEAR(fd, -0.5 * std_normal_pdf(0.5), 1e-10);
}

TEST(GaussHermite, RuleInvariants) {
  for (int order : {16, 32, 64, 96}) {
    const QuadratureRule r = make_gauss_hermite(order);
    ASSERT_EQ(r.order(), order);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) {
      EXPECT_GT(r.weights[i], 0.0);
      if (i > 0) EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
      sum += r.weights[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_GE(default_gauss_hermite().order(), 64);
  EXPECT_THROW(make_gauss_hermite(8), ParameterError);
}

TEST(LognormalExpect, Examples) {
  auto id = [](double w) { return w; };
  EXPECT_NEAR(lognormal_expect(id, 0.3, 0.1), std::exp(0.1), 1e-14);
  EXPECT_NEAR(lognormal_expect([](double w) { return std::log(w); }, 0.5, 0.2), 0.075, 1e-14);
  // E[e^{x xi - x^2/2} 1{xi < 0}] = N(-x).
  EXPECT_NEAR(lognormal_expect(id, 0.3, 0.0, 0.0), std_normal_cdf(-0.3), 1e-14);
}

TEST(LognormalExpect, RestrictedMatchesMonteCarlo) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> xi;
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = xi(rng);
    const double f = z < 0.0 ? std::exp(0.3 * z - 0.045) : 0.0;
    s += f;
    s2 += f * f;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(lognormal_expect([](double w) { return w; }, 0.3, 0.0, 0.0), mean, 3.0 * se);
}

TEST(LognormalExpect, DegenerateX) {
  auto f = [](double w) { return w * w; };
  EXPECT_DOUBLE_EQ(lognormal_expect(f, 0.0, 0.4), std::exp(0.8));
  EXPECT_DOUBLE_EQ(lognormal_expect(f, 0.0, 0.4, 1.0), std::exp(0.8));
  EXPECT_EQ(lognormal_expect(f, 0.0, 0.4, -1.0), 0.0);
}

TEST(LognormalExpect, NonFiniteIntegrandReportsNode) {
  auto bad = [](double w) { return w > 2.0 ? std::numeric_limits<double>::infinity() : w; };
  try {
    lognormal_expect(bad, 0.5, 0.0);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_GT(e.node(), 0.0);
  }
  EXPECT_THROW(lognormal_expect(bad, -0.1, 0.0), DomainError);
}

TEST(LognormalExpect, MomentExactness) {
  for (int k = 0; k <= 3; ++k)
    for (double x : {0.1, 0.5, 1.0})
      for (double y : {-1.0, 0.0, 1.0}) {
        const double got = lognormal_expect([k](double w) { return std::pow(w, k); }, x, y);
        const double want = std::exp(k * (y - x * x / 2) + k * k * x * x / 2);
        EXPECT_LT(rel_err(got, want), 1e-9) << "k=" << k << " x=" << x << " y=" << y;
      }
}

TEST(LognormalExpect, RestrictedPlusComplement) {
  const double x = 0.7, y = 0.2;
  auto f = [](double w) { return std::log(w) * w + 1.0 / w; };
  auto g = [&](double s) { return f(std::exp(x * s + y - x * x / 2)); };
  const double full = lognormal_expect(f, x, y);
  for (double a : {-6.0, -3.0, -1.0, 0.0, 0.4, 0.7, 2.5, 5.0}) {
    const double below = lognormal_expect(f, x, y, a);
    const double above = normal_expect(g, a, kInf);
    EXPECT_NEAR(below + above, full, 1e-10) << "a=" << a;
  }
}

TEST(NormalExpect, FiniteInterval) {
  auto one = [](double) { return 1.0; };
  EXPECT_NEAR(normal_expect(one, -1.0, 2.0), std_normal_cdf(2.0) - std_normal_cdf(-1.0), 1e-15);
  EXPECT_NEAR(normal_expect([](double s) { return s; }, 0.0, kInf), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
}

TEST(FindRoot, Examples) {
  auto lin = [](double p) { return p - 2.0; };
  EXPECT_NEAR(find_root(lin, RootBracket::evaluate(lin, 0.0, 5.0), 1e-12), 2.0, 1e-12);
  auto lg = [](double p) { return std::log(p); };
  EXPECT_NEAR(find_root(lg, RootBracket::evaluate(lg, 0.5, 3.0), 1e-12), 1.0, 1e-12);
  auto cs = [](double c) { return c + 0.5 * c * std_normal_cdf(c) + 0.5 * std_normal_pdf(c); };
  const double r = find_root(cs, RootBracket::evaluate(cs, -5.0, 0.0), 1e-15);
  EXPECT_NEAR(r, oracle::kCStar_0_5, 1e-14);
  EXPECT_LE(std::abs(cs(r)), 1e-12);
}

TEST(FindRoot, NoSignChangeIsBracketError) {
  auto f = [](double p) { return p * p + 1.0; };
  EXPECT_THROW(RootBracket::evaluate(f, -1.0, 1.0), BracketError);
  EXPECT_THROW(find_root(f, RootBracket{-1.0, 1.0, 2.0, 2.0}), BracketError);
}

TEST(FindRoot, IdempotentUnderTighterTolerance) {
  auto f = [](double p) { return std::exp(p) - 3.0 + 0.1 * p; };
  const auto b = RootBracket::evaluate(f, -2.0, 4.0);
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    const double r1 = find_root(f, b, tol);
    const double r2 = find_root(f, b, tol / 2);
    EXPECT_LT(std::abs(r1 - r2), tol);
  }
}

TEST(ExpandBracket, FindsSignChange) {
  auto f = [](double p) { return p - 40.0; };
  const RootBracket b = expand_bracket(f, 0.0, 1.0);
  EXPECT_LE(b.f_lo * b.f_hi, 0.0);
  EXPECT_LT(b.lo, b.hi);
  EXPECT_THROW(expand_bracket([](double) { return 1.0; }, 0.0, 1.0), BracketError);
}

TEST(InvertMonotone, Examples) {
  EXPECT_NEAR(invert_monotone([](double x) { return x * x; }, 4.0, 0.0, 1.0, 1e-12), 2.0, 1e-10);
  EXPECT_NEAR(invert_monotone([](double x) { return 4.0 * x; }, 1.0, 0.0, 1.0, 1e-12), 0.25, 1e-12);
  const CrraSpec spec{1.0, 0.5, 0.9};
  const double v = invert_monotone([&](double x) { return big_M(spec, x); }, 0.05, 0.0, 0.01, 1e-13);
  EXPECT_NEAR(v, oracle::kInvM_log_d09_t005, 1e-8);
}

TEST(InvertMonotone, UnboundedInverse) {
  EXPECT_THROW(invert_monotone([](double x) { return std::atan(x); }, 2.0, 0.0, 1.0), BracketError);
  EXPECT_THROW(invert_monotone([](double x) { return x; }, -1.0, 0.0, 1.0), BracketError);
}

TEST(InvertMonotone, IdempotentUnderTighterTolerance) {
  auto F = [](double x) { return x * x * x + x; };
  for (double tol : {1e-4, 1e-7, 1e-10}) {
    const double a = invert_monotone(F, 5.0, 0.0, 1.0, tol);
    const double b = invert_monotone(F, 5.0, 0.0, 1.0, tol / 2);
    EXPECT_LT(std::abs(a - b), tol);
  }
}

TEST(Integrate1d, Examples) {
  EXPECT_NEAR(integrate_1d([](double) { return 1.0; }, 0.0, 3.0), 3.0, 1e-12);
  EXPECT_NEAR(integrate_1d([](double) { return 4.0; }, 0.0, 0.37), 4.0 * 0.37, 1e-12);
  EXPECT_NEAR(integrate_1d([](double y) { return y; }, 0.0, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(integrate_1d([](double y) { return std::exp(-y) * std::sin(3 * y); }, 0.0, 5.0),
              (3.0 - std::exp(-5.0) * (std::sin(15.0) + 3 * std::cos(15.0))) / 10.0, 1e-9);
}
