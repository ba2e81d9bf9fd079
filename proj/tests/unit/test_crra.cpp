#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gda/crra.hpp"
#include "gda/errors.hpp"
#include "gda/surface.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace gda;
using testing_support::kMerton;
using testing_support::reference_market;

TEST(SolveGCrra, ExpectedUtility) {
  EXPECT_NEAR(solve_g_crra({1.0, 0.0, 0.9}, 0.3), std::exp(-0.045), 1e-14);
  EXPECT_NEAR(solve_g_crra({2.0, 0.0, 0.9}, 0.3), std::exp(-0.09), 1e-14);
  EXPECT_NEAR(solve_g_crra({2.0, 0.5, 0.9}, 0.0), 1.0, 1e-15);
}

TEST(SolveGCrra, AgreesWithSurface) {
  for (double rho : {0.5, 1.0, 3.0})
    for (double delta : {0.7, 0.9, 1.1, 1.3}) {
      const CrraSpec spec{rho, 0.5, delta};
      const GdaSurface s(spec.utility(), spec.params());
      for (double x : {0.0, 1e-3, 0.1, 0.3, 0.8}) {
        EXPECT_NEAR(solve_g_crra(spec, x), s.g(x * x, 0.0), 1e-8);
        EXPECT_NEAR(crra_threshold(spec, x), s.solve_H(x, 0.37), 1e-8);
      }
    }
}

TEST(MCrra, ExamplesAndBounds) {
  for (double rho : {0.5, 1.0, 3.0}) {
    EXPECT_DOUBLE_EQ(m_crra({rho, 0.0, 0.8}, 0.4), 1.0 / rho);
    EXPECT_DOUBLE_EQ(m_crra({rho, 0.5, 1.2}, 0.0), 1.0 / rho);
    for (double delta : {0.7, 0.9, 1.1, 1.3})
      for (double x : {1e-3, 0.1, 0.5, 1.0, 2.0}) {
        const CrraSpec spec{rho, 0.5, delta};
        const double m = m_crra(spec, x);
        const double deficit = m_deficit_crra(spec, x);
        EXPECT_GT(m, 0.0);
        EXPECT_LE(m, 1.0 / rho);
        if (x >= 0.1) EXPECT_GT(deficit, 0.0);  // at x = 1e-3 the gap is below the double range
        EXPECT_NEAR(1.0 / rho - m, deficit, 1e-15);
      }
  }
  EXPECT_NEAR(m_crra({1.0, 0.5, 0.9}, 0.3), oracle::kM_log_d09_x03, 1e-11);
  EXPECT_EQ(m_deficit_crra({1.0, 0.0, 0.9}, 0.3), 0.0);
  EXPECT_EQ(m_deficit_crra({1.0, 0.5, 0.9}, 0.0), 0.0);
  // Invisible in m itself, still resolved by the deficit.
  EXPECT_EQ(m_crra({1.0, 0.5, 0.9}, 0.01), 1.0);
  EXPECT_GT(m_deficit_crra({1.0, 0.5, 0.9}, 0.01), 0.0);
}

TEST(MCrra, AgreesWithSurface) {
  for (double delta : {0.8, 1.2}) {
    const CrraSpec spec{2.0, 0.5, delta};
    const GdaSurface s(spec.utility(), spec.params());
    for (double x : {1e-3, 0.3, 1.0})
      for (double y : {-0.4, 0.0, 0.3}) EXPECT_NEAR(m_crra(spec, x), s.m(x, y), 1e-8);
  }
}

TEST(BigM, ExamplesAndOracle) {
  EXPECT_EQ(big_M({1.0, 0.5, 0.9}, 0.0), 0.0);
  EXPECT_NEAR(big_M({2.0, 0.0, 0.9}, 0.3), 4.0 * 0.3, 1e-12);
  EXPECT_NEAR(big_M({1.0, 0.5, 0.9}, 0.12), oracle::kBigM_log_d09_v012, 1e-8);
  for (double delta : {0.7, 1.3}) {
    const CrraSpec spec{1.5, 0.5, delta};
    double prev = 0.0;
    for (double v : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const double M = big_M(spec, v);
      EXPECT_GT(M, prev);
      EXPECT_GE(M, 1.5 * 1.5 * v);
      prev = M;
    }
  }
}

TEST(BigMTable, MatchesDirectIntegralAndInverts) {
  const CrraSpec spec{1.0, 0.5, 0.9};
  const BigMTable table(spec);
  for (double v : {0.0, 0.005, 0.12, 0.4}) EXPECT_NEAR(table.M(v), big_M(spec, v), 1e-10);
  EXPECT_NEAR(table.inverse(0.05), oracle::kInvM_log_d09_t005, 1e-8);
  for (double target : {1e-6, 0.05, 0.12, 0.6}) EXPECT_NEAR(table.M(table.inverse(target)), target, 1e-11);
  EXPECT_EQ(table.inverse(0.0), 0.0);
  // Y(v) = int du / m(sqrt u) lies between v and M(v) for log utility.
  EXPECT_GT(table.Y(0.1), 0.1);
  EXPECT_LT(table.Y(0.1), table.M(0.1));
}

TEST(EquilibriumCrra, MertonAndTerminalLimit) {
  const auto grid = make_time_grid(reference_market(), 0.01);
  const auto merton = equilibrium_crra({1.0, 0.0, 0.9}, reference_market(), grid);
  ASSERT_EQ(merton.size(), 300u);
  for (std::size_t i = 0; i < merton.size(); ++i) EXPECT_NEAR(merton.pi[i](0), kMerton, 1e-12);
  for (double delta : {0.7, 0.9, 1.1, 1.3}) {
    const auto path = equilibrium_crra({1.0, 0.5, delta}, reference_market(), {0.0, 2.99, 3.0 - 1e-8});
    EXPECT_NEAR(path.pi.back()(0), kMerton, 1e-3);
    EXPECT_LE(std::abs(path.pi[2](0) - kMerton), std::abs(path.pi[1](0) - kMerton));
    EXPECT_LT(path.pi[0](0), kMerton);
  }
}

TEST(EquilibriumCrra, MonotoneInDeltaAndBeta) {
  const std::vector<double> t0{0.0};
  auto pi0 = [&](double beta, double delta) {
    return equilibrium_crra({1.0, beta, delta}, reference_market(), t0).pi[0](0);
  };
  EXPECT_GT(pi0(0.5, 0.7), pi0(0.5, 0.8));
  EXPECT_GT(pi0(0.5, 0.8), pi0(0.5, 0.9));
  EXPECT_LT(pi0(0.5, 1.1), pi0(0.5, 1.2));
  EXPECT_LT(pi0(0.5, 1.2), pi0(0.5, 1.3));
  for (double delta : {0.9, 1.1}) {
    EXPECT_GT(pi0(0.5, delta), pi0(0.6, delta));
    EXPECT_GT(pi0(0.6, delta), pi0(0.7, delta));
  }
}

TEST(EquilibriumCrra, DecreaseThenIncreaseShape) {
  const auto grid = make_time_grid(reference_market(), 0.01);
  const auto path = equilibrium_crra({1.0, 0.5, 0.9}, reference_market(), grid);
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < path.size(); ++i)
    if (path.pi[i](0) < path.pi[argmin](0)) argmin = i;
  EXPECT_GT(argmin, 0u);
  EXPECT_LT(argmin, path.size() - 1);
  EXPECT_LT(path.pi[argmin](0), path.pi.front()(0));
  EXPECT_LT(path.pi[argmin](0), path.pi.back()(0));
}

TEST(EquilibriumCrra, DropsNodesAtHorizon) {
  const auto path = equilibrium_crra({1.0, 0.5, 0.9}, reference_market(), {0.0, 1.0, 3.0});
  EXPECT_EQ(path.size(), 2u);
}

TEST(CrraSpec, Validation) {
  EXPECT_THROW(CrraSpec({1.0, 0.5, 1.0}).validate(), ParameterError);
  EXPECT_THROW(CrraSpec({0.0, 0.5, 0.9}).validate(), ParameterError);
  EXPECT_THROW(CrraSpec({1.0, -0.5, 0.9}).validate(), ParameterError);
  EXPECT_THROW(m_crra({1.0, 0.5, 0.9}, -0.1), DomainError);
  EXPECT_THROW(HdraSpec::affine(1.0, -0.5), ParameterError);
}

TEST(EquilibriumHdra, ExpectedUtilityFormula) {
  for (double alpha : {0.5, 2.0}) {
    const auto path = equilibrium_hdra({1.0, 0.0, 0.9}, HdraSpec::affine(1.0, alpha), reference_market());
    ASSERT_EQ(path.size(), 300u);
    for (std::size_t i = 0; i < path.size(); ++i) {
      EXPECT_NEAR(path.pi[i](0) * (1.0 + alpha * path.grid[i]), kMerton, 1e-8);
      if (i > 0) EXPECT_LT(path.pi[i](0), path.pi[i - 1](0));
    }
  }
}

TEST(EquilibriumHdra, BelowExpectedUtility) {
  for (double alpha : {0.5, 2.0}) {
    const auto eu = equilibrium_hdra({1.0, 0.0, 0.9}, HdraSpec::affine(1.0, alpha), reference_market());
    const auto gda = equilibrium_hdra({1.0, 0.5, 0.9}, HdraSpec::affine(1.0, alpha), reference_market());
    ASSERT_EQ(eu.size(), gda.size());
    for (std::size_t i = 0; i < eu.size(); ++i) {
      const CrraSpec frozen{1.0 + alpha * eu.grid[i], 0.5, 0.9};
      const double deficit = m_deficit_crra(frozen, std::sqrt(gda.v[i]));
      EXPECT_LE(gda.pi[i](0), eu.pi[i](0) + 1e-15);  // ties near T are equal to the last bit
      EXPECT_GT(deficit, 0.0);
      EXPECT_NEAR(eu.pi[i](0) - gda.pi[i](0), deficit * 0.2 / 0.3, 1e-12);
    }
  }
}

TEST(EquilibriumHdra, ConstantRhoIsCrra) {
  const CrraSpec spec{1.0, 0.5, 0.9};
  const auto hdra = equilibrium_hdra(spec, HdraSpec::affine(1.0, 0.0), reference_market());
  const auto crra = equilibrium_crra(spec, reference_market(), hdra.grid);
  ASSERT_EQ(hdra.size(), crra.size());
  for (std::size_t i = 0; i < hdra.size(); ++i) {
    EXPECT_EQ(hdra.pi[i](0), crra.pi[i](0));
    EXPECT_EQ(hdra.v[i], crra.v[i]);
  }
}

TEST(EquilibriumHdra, MatchesFrozenRhoSurface) {
  const double alpha = 0.5;
  const auto path = equilibrium_hdra({1.0, 0.5, 1.2}, HdraSpec::affine(1.0, alpha), reference_market());
  for (std::size_t i = 0; i < path.size(); i += 37) {
    const double rho = 1.0 + alpha * path.grid[i];
    const double m = m_crra({rho, 0.5, 1.2}, std::sqrt(path.v[i]));
    EXPECT_NEAR(path.a[i](0), m * 0.2, 1e-9);
  }
}
