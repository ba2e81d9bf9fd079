#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gda/crra.hpp"
#include "gda/equilibrium.hpp"
#include "gda/errors.hpp"
#include "gda/surface.hpp"
#include "gda/verification.hpp"
#include "test_support.hpp"

using namespace gda;
using testing_support::kMerton;
using testing_support::reference_market;

namespace {

StrategyPath constant_path(const MarketModel& market, double pi, double step = 0.01) {
  const auto grid = make_time_grid(market, step);
  StrategyPath p;
  const double s = market.sigma(0.0)(0, 0);
  const double mu = market.mu(0.0)(0);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double tau = market.horizon() - grid[i];
    p.grid.push_back(grid[i]);
    p.pi.push_back(Eigen::VectorXd::Constant(1, pi));
    p.a.push_back(Eigen::VectorXd::Constant(1, s * pi));
    p.v.push_back(s * s * pi * pi * tau);
    p.y.push_back(mu * pi * tau);
    p.m_val.push_back(pi * s / market.lambda(0.0)(0));
    p.residual.push_back(0.0);
  }
  return p;
}

double mean(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

}  // namespace

TEST(McGdaValue, ExpectedUtilityClosedForm) {
  McConfig mc;
  const auto est = mc_gda_value(Utility::crra(1.0), {0.0, 0.9}, LogNormal::from_vy(0.09, 0.06), mc);
  EXPECT_GT(est.std_err, 0.0);
  EXPECT_LE(std::abs(est.estimate - std::exp(0.015)), 3.0 * est.std_err);
}

TEST(McGdaValue, DeterministicOutcomeIsExact) {
  McConfig mc;
  mc.n_paths = 10000;
  const auto est = mc_gda_value(Utility::crra(2.0), {0.5, 0.9}, LogNormal::from_vy(0.0, 0.1), mc);
  EXPECT_NEAR(est.estimate, std::exp(0.1), 1e-13);
  EXPECT_EQ(est.std_err, 0.0);
}

TEST(McGdaValue, SandwichesQuadrature) {
  McConfig mc;
  for (double delta : {0.9, 1.2}) {
    const Utility u = Utility::crra(1.0);
    const GdaParams p{0.5, delta};
    const auto dist = LogNormal::from_vy(0.09, 0.06);
    const auto est = mc_gda_value(u, p, dist, mc);
    EXPECT_LE(std::abs(est.estimate - gda_value(u, p, dist)), 3.0 * est.std_err) << "delta=" << delta;
  }
}

TEST(McGdaValue, SeededDeterminism) {
  McConfig mc;
  mc.n_paths = 20000;
  const auto a = mc_gda_value(Utility::crra(1.0), {0.5, 0.9}, LogNormal::from_vy(0.09, 0.06), mc);
  const auto b = mc_gda_value(Utility::crra(1.0), {0.5, 0.9}, LogNormal::from_vy(0.09, 0.06), mc);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_err, b.std_err);
  mc.seed += 1;
  const auto c = mc_gda_value(Utility::crra(1.0), {0.5, 0.9}, LogNormal::from_vy(0.09, 0.06), mc);
  EXPECT_NE(a.estimate, c.estimate);
}

TEST(McGdaValue, Validation) {
  McConfig mc;
  mc.n_paths = 1;
  EXPECT_THROW(mc_gda_value(Utility::crra(1.0), {0.5, 0.9}, LogNormal::from_vy(0.09, 0.0), mc), ParameterError);
  EXPECT_THROW(mc_gda_value(Utility::crra(1.0), {0.5, 0.9}, Empirical{{1.0}, {1.0}}, McConfig{}), ParameterError);
}

TEST(SimulateWealth, ZeroStrategyIsRiskless) {
  McConfig mc;
  mc.n_paths = 1000;
  for (double w : simulate_wealth(reference_market(), constant_path(reference_market(), 0.0), 0.0, mc))
    EXPECT_EQ(w, 1.0);
}

TEST(SimulateWealth, ConstantStrategyLaw) {
  McConfig mc;
  mc.n_paths = 200000;
  mc.n_steps = 4;
  const auto market = reference_market();
  const auto path = constant_path(market, 0.5);
  const double t0 = 1.0;
  const auto w = simulate_wealth(market, path, t0, mc);
  std::vector<double> lw;
  for (double x : w) lw.push_back(std::log(x));
  const double m = mean(lw);
  double var = 0.0;
  for (double x : lw) var += (x - m) * (x - m);
  var /= (lw.size() - 1);
  const double v = 0.25 * 0.09 * 2.0;
  const double y = 0.06 * 0.5 * 2.0;
  EXPECT_LE(std::abs(m - (y - v / 2)), 3.0 * std::sqrt(var / lw.size()));
  EXPECT_LE(std::abs(var - v), 3.0 * v * std::sqrt(2.0 / lw.size()));
}

TEST(SimulateWealth, MertonCumulativeVariance) {
  McConfig mc;
  const auto market = reference_market();
  const auto path = equilibrium_crra({1.0, 0.0, 0.9}, market, make_time_grid(market, 0.01));
  const auto w = simulate_wealth(market, path, 0.0, mc);
  std::vector<double> lw;
  for (double x : w) lw.push_back(std::log(x));
  const double m = mean(lw);
  double var = 0.0;
  for (double x : lw) var += (x - m) * (x - m);
  var /= (lw.size() - 1);
  const double v0 = kMerton * kMerton * 0.09 * 3.0;
  EXPECT_NEAR(path.v.front(), v0, 1e-12);
  EXPECT_LE(std::abs(var - v0), 3.0 * v0 * std::sqrt(2.0 / lw.size()));
  EXPECT_LE(std::abs(m - (path.y.front() - path.v.front() / 2)), 3.0 * std::sqrt(var / lw.size()));
}

TEST(PerturbationTest, MertonIsStrictOptimumUnderExpectedUtility) {
  const auto market = reference_market();
  const auto path = constant_path(market, kMerton);
  PerturbationSpec spec;
  spec.t = 1.0;
  spec.k = Eigen::VectorXd::Constant(1, 0.5);
  const auto rep = perturbation_test(Utility::crra(1.0), {0.0, 0.9}, market, path, spec);
  EXPECT_FALSE(rep.sqrt_scaling);
  EXPECT_LE(std::abs(rep.first_order), 1e-8);
  EXPECT_LT(rep.second_order, 0.0);
  EXPECT_TRUE(rep.pass);
  // Second-order coefficient is g_v |sigma' k|^2.
  const GdaSurface s(Utility::crra(1.0), {0.0, 0.9});
  const auto i = static_cast<std::size_t>(100);
  EXPECT_NEAR(rep.second_order, s.g_partials(path.v[i], path.y[i]).g_v * 0.0225, 1e-6);
}

TEST(PerturbationTest, DisappointmentAversionSquareRootLimit) {
  const auto market = reference_market();
  const auto zero = solve_equilibrium_da(Utility::crra(1.0), {0.5, 1.0}, market);
  PerturbationSpec spec;
  spec.t = 0.0;
  spec.k = Eigen::VectorXd::Constant(1, 1.0);
  spec.epsilons = {1e-2, 1e-4, 1e-6};
  const auto rep = perturbation_test(Utility::crra(1.0), {0.5, 1.0}, market, zero, spec);
  EXPECT_TRUE(rep.sqrt_scaling);
  EXPECT_NEAR(rep.expected, 0.3 * c_star(0.5).value, 1e-15);
  EXPECT_NEAR(rep.leading, 0.3 * c_star(0.5).value, 1e-3);
  EXPECT_TRUE(rep.pass);
}

TEST(PerturbationTest, RejectsMertonUnderGda) {
  const auto market = reference_market();
  const auto path = constant_path(market, kMerton);
  bool rejected = false;
  for (const auto& k : direction_basket(market, 0.0, 7)) {
    PerturbationSpec spec;
    spec.t = 0.0;
    spec.k = k;
    const auto rep = perturbation_test(Utility::crra(1.0), {0.5, 0.9}, market, path, spec);
    if (rep.first_order > 1e-4) rejected = true;
  }
  EXPECT_TRUE(rejected);
}

TEST(PerturbationTest, Errors) {
  const auto market = reference_market();
  const auto path = constant_path(market, kMerton);
  PerturbationSpec spec;
  spec.t = 0.005;
  spec.k = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_THROW(perturbation_test(Utility::crra(1.0), {0.5, 0.9}, market, path, spec), DomainError);
  spec.t = 0.0;
  spec.k = Eigen::VectorXd::Constant(2, 1.0);
  EXPECT_THROW(perturbation_test(Utility::crra(1.0), {0.5, 0.9}, market, path, spec), ParameterError);
  spec.k = Eigen::VectorXd::Constant(1, 1.0);
  spec.t = 2.99;
  spec.epsilons = {0.5};
  EXPECT_THROW(perturbation_test(Utility::crra(1.0), {0.5, 0.9}, market, path, spec), DomainError);
}

TEST(DirectionBasket, EightUnitVectors) {
  Eigen::Matrix2d sigma;
  sigma << 0.3, 0.0, 0.1, 0.2;
  const MarketModel market = MarketModel::constant(1.0, Eigen::Vector2d(0.06, 0.04), sigma);
  const auto basket = direction_basket(market, 0.0, 11);
  ASSERT_EQ(basket.size(), 8u);
  for (std::size_t j = 0; j < basket.size(); j += 2) {
    EXPECT_NEAR(basket[j].norm(), 1.0, 1e-14);
    EXPECT_NEAR((basket[j] + basket[j + 1]).norm(), 0.0, 1e-15);
  }
  EXPECT_NEAR(basket[2].dot(market.lambda(0.0).normalized()), 1.0, 1e-14);
  const auto again = direction_basket(market, 0.0, 11);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(basket[j], again[j]);
}

TEST(ExtrapolateToZero, PolynomialsAreExact) {
  const std::vector<double> h{0.4, 0.2, 0.1};
  std::vector<double> f;
  for (double x : h) f.push_back(1.5 - 2.0 * x + 0.7 * x * x);
  EXPECT_NEAR(extrapolate_to_zero(h, f), 1.5, 1e-13);
  EXPECT_EQ(extrapolate_to_zero({0.3}, {2.0}), 2.0);
  EXPECT_THROW(extrapolate_to_zero({0.1, 0.2}, {1.0}), ParameterError);
}

TEST(Certify, SolverOutputPassesAndScaledPathFails) {
  const auto market = reference_market();
  const Utility u = Utility::crra(1.0);
  for (double delta : {0.9, 1.1}) {
    const GdaParams p{0.5, delta};
    const auto path = solve_equilibrium(u, p, market);
    const std::vector<double> times{0.0, 1.0, 2.0, 2.99};
    const auto rows = certify(u, p, market, path, times);
    ASSERT_EQ(rows.size(), 32u);
    for (const auto& r : rows) EXPECT_TRUE(r.pass) << "t=" << r.t << " k=" << r.k_index << " c=" << r.first_order_coeff;
    bool failed = false;
    for (const auto& r : certify(u, p, market, scale_path(path, 1.1), times)) failed |= !r.pass;
    EXPECT_TRUE(failed);
  }
}

TEST(ScalePath, RescalesConsistently) {
  const auto path = constant_path(reference_market(), 0.5);
  const auto s = scale_path(path, 2.0);
  EXPECT_NEAR(s.pi[3](0), 1.0, 1e-15);
  EXPECT_NEAR(s.v[3], 4.0 * path.v[3], 1e-15);
  EXPECT_NEAR(s.y[3], 2.0 * path.y[3], 1e-15);
}
