#include "gda/crra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gda/errors.hpp"
#include "gda/numerics.hpp"

namespace gda {

using numerics::std_normal_cdf;
using numerics::std_normal_pdf;

void CrraSpec::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be positive");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be positive");
  if (delta == 1.0)
    throw ParameterError("delta = 1 has the non-participation equilibrium (pi = 0); "
                         "the CRRA pipeline needs delta != 1");
}

namespace {

double boundary_threshold(const CrraSpec& s) {
  const double ld = std::log(s.delta);
  if (s.delta < 1.0 || s.beta == 0.0) return ld;
  if (s.rho == 1.0) return ld / (1.0 + s.beta);
  return std::log((1.0 + s.beta) / (std::pow(s.delta, s.rho - 1.0) + s.beta)) / (1.0 - s.rho);
}

}  // namespace

double crra_threshold(const CrraSpec& s, double x) {
  s.validate();
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("x must be >= 0");
  if (x == 0.0) return boundary_threshold(s);
  const double ld = std::log(s.delta);
  const double z_eu = ld + 0.5 * (1.0 - s.rho) * x * x;
  if (s.beta == 0.0) return z_eu;

  numerics::ScalarFn f;
  if (s.rho == 1.0) {
    f = [&](double z) {
      const double a = z / x;
      return z - ld + s.beta * std_normal_cdf(a) * z + s.beta * x * std_normal_pdf(a);
    };
  } else {
    const double k = 1.0 - s.rho;
    const double dk = std::pow(s.delta, s.rho - 1.0);
    // Log form; its sign is sign((1 - rho) F) for the increasing residual F.
    f = [&, k, dk](double z) {
      const double a = z / x;
      return k * z + std::log(dk + s.beta * std_normal_cdf(a)) - 0.5 * k * k * x * x -
             std::log1p(s.beta * std_normal_cdf(a - k * x));
    };
  }
  const auto bracket =
      numerics::expand_bracket(f, z_eu - 0.25, z_eu + 1e-9);
  return numerics::find_root(f, bracket, 1e-15);
}

double solve_g_crra(const CrraSpec& s, double x) {
  const double z = crra_threshold(s, x);
  return std::exp(z - 0.5 * x * x) / s.delta;
}

double m_crra(const CrraSpec& s, double x) {
  s.validate();
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("x must be >= 0");
  if (x == 0.0 || s.beta == 0.0) return 1.0 / s.rho;
  const double z = crra_threshold(s, x);
  const double w = z / x - (1.0 - s.rho) * x;
  const double gp = s.beta * std_normal_pdf(w) / (1.0 + s.beta * std_normal_cdf(w));
  return x / (s.rho * x + gp);
}

double m_deficit_crra(const CrraSpec& s, double x) {
  s.validate();
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("x must be >= 0");
  if (x == 0.0 || s.beta == 0.0) return 0.0;
  const double z = crra_threshold(s, x);
  const double w = z / x - (1.0 - s.rho) * x;
  const double gp = s.beta * std_normal_pdf(w) / (1.0 + s.beta * std_normal_cdf(w));
  return gp / (s.rho * (s.rho * x + gp));
}

double big_M(const CrraSpec& s, double v) {
  s.validate();
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("v must be >= 0");
  if (s.beta == 0.0) return s.rho * s.rho * v;
  // In x = sqrt(u) the integrand 2x / m(x)^2 is smooth at the origin.
  return numerics::integrate_1d(
      [&s](double x) {
        const double m = m_crra(s, x);
        return 2.0 * x / (m * m);
      },
      0.0, std::sqrt(v), 1e-12);
}

BigMTable::BigMTable(CrraSpec spec, double knot_spacing) : spec_(spec), h_(knot_spacing) {
  spec_.validate();
  if (!(h_ > 0.0)) throw ParameterError("knot spacing must be positive");
  cum_M_.push_back(0.0);
  cum_Y_.push_back(0.0);
}

// Integrands in x = sqrt(u): du / m^k = 2x dx / m(x)^k.
double BigMTable::inv_m2(double x) const {
  const double m = m_crra(spec_, x);
  return 2.0 * x / (m * m);
}

double BigMTable::inv_m(double x) const { return 2.0 * x / m_crra(spec_, x); }

double BigMTable::piece(double (BigMTable::*integrand)(double) const, double a, double b) const {
  if (spec_.beta == 0.0) {
    const double m0 = 1.0 / spec_.rho;
    return (b - a) / (integrand == &BigMTable::inv_m2 ? m0 * m0 : m0);
  }
  return numerics::integrate_1d([this, integrand](double x) { return (this->*integrand)(x); },
                                std::sqrt(a), std::sqrt(b), 1e-13);
}

void BigMTable::extend_to_v(double v) const {
  while (h_ * static_cast<double>(cum_M_.size() - 1) < v) {
    const double a = h_ * static_cast<double>(cum_M_.size() - 1);
    cum_M_.push_back(cum_M_.back() + piece(&BigMTable::inv_m2, a, a + h_));
    cum_Y_.push_back(cum_Y_.back() + piece(&BigMTable::inv_m, a, a + h_));
  }
}

void BigMTable::extend_to_M(double target) const {
  int guard = 0;
  while (cum_M_.back() < target) {
    if (++guard > 10000000) throw BracketError("M^{-1}: unbounded inverse");
    const double a = h_ * static_cast<double>(cum_M_.size() - 1);
    cum_M_.push_back(cum_M_.back() + piece(&BigMTable::inv_m2, a, a + h_));
    cum_Y_.push_back(cum_Y_.back() + piece(&BigMTable::inv_m, a, a + h_));
  }
}

double BigMTable::M(double v) const {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("M: v must be >= 0");
  std::lock_guard lock(mu_);
  extend_to_v(v);
  const auto k = std::min(static_cast<std::size_t>(v / h_), cum_M_.size() - 1);
  return cum_M_[k] + piece(&BigMTable::inv_m2, h_ * static_cast<double>(k), v);
}

double BigMTable::Y(double v) const {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("Y: v must be >= 0");
  std::lock_guard lock(mu_);
  extend_to_v(v);
  const auto k = std::min(static_cast<std::size_t>(v / h_), cum_Y_.size() - 1);
  return cum_Y_[k] + piece(&BigMTable::inv_m, h_ * static_cast<double>(k), v);
}

double BigMTable::inverse(double target) const {
  if (!(target >= 0.0) || !std::isfinite(target)) throw DomainError("M^{-1}: target must be >= 0");
  if (target == 0.0) return 0.0;
  std::size_t k;
  double base;
  double upper;
  {
    std::lock_guard lock(mu_);
    extend_to_M(target);
    k = static_cast<std::size_t>(
        std::upper_bound(cum_M_.begin(), cum_M_.end(), target) - cum_M_.begin());
    k = std::max<std::size_t>(k, 1) - 1;  // cum_M_[k] <= target < cum_M_[k+1]
    if (k + 1 >= cum_M_.size()) k = cum_M_.size() - 2;
    base = cum_M_[k];
    upper = cum_M_[k + 1];
  }
  const double a = h_ * static_cast<double>(k);
  auto f = [&](double v) { return base + piece(&BigMTable::inv_m2, a, v) - target; };
  const double fa = base - target;
  if (fa == 0.0) return a;
  const double fb = upper - target;
  if (fb == 0.0) return a + h_;
  return numerics::find_root(f, numerics::RootBracket{a, a + h_, fa, fb}, 1e-15);
}

StrategyPath equilibrium_crra(const CrraSpec& spec, const MarketModel& market,
                              const std::vector<double>& grid) {
  spec.validate();
  const BigMTable table(spec);
  StrategyPath path;
  const double T = market.horizon();
  for (double t : grid) {
    if (t >= T) continue;
    if (t < 0.0) throw DomainError("grid times must be >= 0");
    const double I = market.integrated_lambda_sq(t);
    const double v = table.inverse(I);
    const double m = m_crra(spec, std::sqrt(v));
    const Eigen::VectorXd& lam = market.lambda(t);
    const Eigen::VectorXd a = m * lam;
    path.grid.push_back(t);
    path.a.push_back(a);
    path.pi.push_back(market.sigma(t).transpose().partialPivLu().solve(a));
    path.v.push_back(v);
    path.y.push_back(table.Y(v));
    path.m_val.push_back(m);
    path.residual.push_back(std::abs(table.M(v) - I));
  }
  return path;
}

HdraSpec HdraSpec::affine(double rho0, double alpha) {
  if (!(rho0 > 0.0)) throw ParameterError("rho(0) must be positive");
  if (!(alpha >= 0.0)) throw ParameterError("HDRA slope alpha must be >= 0 (rho increasing)");
  HdraSpec h;
  h.rho_fn = [rho0, alpha](double t) { return rho0 + alpha * t; };
  h.constant = alpha == 0.0;
  std::ostringstream os;
  os << "rho(t)=" << rho0 << "+" << alpha << "t";
  h.description = os.str();
  return h;
}

StrategyPath equilibrium_hdra(const CrraSpec& spec, const HdraSpec& hdra,
                              const MarketModel& market, const SolverConfig& cfg) {
  cfg.validate();
  if (!hdra.rho_fn) throw ParameterError("HDRA spec needs rho(t)");
  const double T = market.horizon();
  const double rho0 = hdra.rho_fn(0.0);
  const double rhoT = hdra.rho_fn(T);
  if (!(rho0 > 0.0) || !(rhoT >= rho0)) throw ParameterError("rho(t) must be positive and increasing");

  CrraSpec base = spec;
  base.rho = rho0;
  base.validate();
  if (hdra.constant) return equilibrium_crra(base, market, make_time_grid(market, cfg.grid_step));

  const SolverGrid sgrid = make_solver_grid(market, cfg.grid_step);
  const auto& grid = sgrid.t;
  PicardProblem prob;
  prob.t = grid;
  const std::size_t N = grid.size() - 1;
  std::vector<CrraSpec> node_spec(N + 1, base);
  for (std::size_t i = 0; i <= N; ++i) {
    node_spec[i].rho = hdra.rho_fn(grid[i]);
    if (!(node_spec[i].rho > 0.0)) throw ParameterError("rho(t) must stay positive");
  }
  for (std::size_t j = 0; j < N; ++j) prob.ell.push_back(market.lambda(grid[j]).squaredNorm());
  prob.m_terminal = 1.0 / rhoT;
  prob.m_upper = 1.0 / rho0;  // m(t, x) <= 1/rho(t) <= 1/rho(0)
  const double lam = market.lambda_sup();
  const double xmax = prob.m_upper * lam * std::sqrt(T);
  CrraSpec at_T = base;
  at_T.rho = rhoT;
  prob.lipschitz = std::max(
      sample_lipschitz([&](double x, double) { return m_crra(base, x); }, xmax, 0.0, 0.0),
      sample_lipschitz([&](double x, double) { return m_crra(at_T, x); }, xmax, 0.0, 0.0));
  prob.mfn = [&node_spec](std::size_t i, double x, double) { return m_crra(node_spec[i], x); };
  return path_from_solution(market, sgrid, solve_picard(prob, cfg));
}

}  // namespace gda
