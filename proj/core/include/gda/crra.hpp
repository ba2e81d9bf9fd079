#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "gda/equilibrium.hpp"
#include "gda/market.hpp"
#include "gda/preference.hpp"

namespace gda {

struct CrraSpec {
  double rho = 1.0;
  double beta = 0.0;
  double delta = 0.9;

  void validate() const;
  Utility utility() const { return Utility::crra(rho); }
  GdaParams params() const { return {beta, delta}; }
};

/// z(x) = log(delta g(x^2, x^2/2)), the root of the CRRA threshold equation
/// (equal to H(x, y) for every y).
double crra_threshold(const CrraSpec& spec, double x);

/// g(x^2, 0) = e^{z - x^2/2} / delta.
double solve_g_crra(const CrraSpec& spec, double x);

/// m(x) = x / (rho x + G'(z/x - (1 - rho) x)), G(w) = log(1 + beta N(w)); m(0) = 1/rho.
double m_crra(const CrraSpec& spec, double x);

/// 1/rho - m(x) without cancellation. Near x = 0 the gap falls far below the resolution of
/// m itself (it decays like N'(z/x)), so strict comparisons with 1/rho go through this.
double m_deficit_crra(const CrraSpec& spec, double x);

/// M(v) = int_0^v du / m(sqrt u)^2.
double big_M(const CrraSpec& spec, double v);

/// M and Y(v) = int_0^v du / m(sqrt u) tabulated on knots that grow on demand,
/// with M^{-1} by bracketed root finding inside the located knot interval.
/// Safe for concurrent use.
class BigMTable {
 public:
  explicit BigMTable(CrraSpec spec, double knot_spacing = 0.01);

  double M(double v) const;
  double Y(double v) const;
  double inverse(double target) const;

 private:
  void extend_to_M(double target) const;
  void extend_to_v(double v) const;
  double piece(double (BigMTable::*integrand)(double) const, double a, double b) const;
  double inv_m2(double u) const;
  double inv_m(double u) const;

  CrraSpec spec_;
  double h_;
  mutable std::mutex mu_;
  mutable std::vector<double> cum_M_;  // cum_M_[k] = M(k h)
  mutable std::vector<double> cum_Y_;
};

/// Semi-analytic equilibrium: v(t) = M^{-1}(int_t^T |lambda|^2), a_t = m(sqrt v(t)) lambda(t).
/// Nodes at or beyond T are dropped.
StrategyPath equilibrium_crra(const CrraSpec& spec, const MarketModel& market,
                              const std::vector<double>& grid);

/// Horizon-dependent relative risk aversion rho(t), increasing and positive.
struct HdraSpec {
  std::function<double(double)> rho_fn;
  bool constant = false;
  std::string description;

  /// rho(t) = rho0 + alpha t.
  static HdraSpec affine(double rho0, double alpha);
};

/// Backward Picard solve of a_t = m(t, sqrt(int_t^T |a|^2)) lambda(t) with rho frozen at rho(t)
/// (spec.rho is ignored). A constant rho_fn reduces to equilibrium_crra.
StrategyPath equilibrium_hdra(const CrraSpec& spec, const HdraSpec& hdra,
                              const MarketModel& market, const SolverConfig& cfg = {});

}  // namespace gda
