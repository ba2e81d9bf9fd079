#include "gda/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gda/errors.hpp"

namespace gda::numerics {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Legendre = boost::math::quadrature::gauss<double, 30>;

// Truncated expectations march unit-width Gauss–Legendre panels away from the
// truncation point until a panel no longer changes the sum. The weighted integrand
// is entire, so a 30-point panel is exact to rounding.
constexpr double kPanelWidth = 1.0;
constexpr double kTailCut = 38.5;  // the normal density underflows beyond this
constexpr int kMaxPanels = 80;

void require_finite(double z, const char* what) {
  if (!std::isfinite(z)) {
    std::ostringstream os;
    os << what << ": non-finite argument " << z;
    throw DomainError(os.str());
  }
}

double checked(const ScalarFn& f, double s) {
  const double v = f(s);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand is non-finite (" << v << ") at node " << s;
    throw EvaluationError(os.str(), s);
  }
  return v;
}

// f(s) * pdf(s), skipping f where the density has underflowed.
auto weighted(const ScalarFn& f) {
  return [&f](double s) {
    const double w = std::exp(-0.5 * s * s) * kInvSqrt2Pi;
    if (w == 0.0) return 0.0;
    return checked(f, s) * w;
  };
}

double gauss_hermite_expect(const ScalarFn& f) {
  const auto& rule = default_gauss_hermite();
  double sum = 0.0;
  for (int i = 0; i < rule.order(); ++i) sum += rule.weights[i] * checked(f, rule.nodes[i]);
  return sum;
}

double panels(const ScalarFn& f, double a, double b) {
  if (a == b) return 0.0;
  const auto g = weighted(f);
  const int n = std::max(1, static_cast<int>(std::ceil((b - a) / kPanelWidth)));
  const double w = (b - a) / n;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += Legendre::integrate(g, a + k * w, a + (k + 1) * w);
  return sum;
}

// Integral of f pdf from `from` towards -inf (dir = -1) or +inf (dir = +1).
double march(const ScalarFn& f, double from, int dir) {
  const auto g = weighted(f);
  double sum = 0.0;
  double b = from;
  for (int k = 0; k < kMaxPanels; ++k) {
    if (dir * b >= kTailCut) break;
    const double next = b + dir * kPanelWidth;
    const double p = dir > 0 ? Legendre::integrate(g, b, next) : Legendre::integrate(g, next, b);
    sum += p;
    b = next;
    // Past the bulk of the density, stop once panels are below rounding.
    if (dir * b > 1.0 && std::abs(p) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// E[f 1{xi < a}]
double expect_below(const ScalarFn& f, double a) {
  if (a == kInf) return gauss_hermite_expect(f);
  if (a <= -kTailCut) return 0.0;
  if (a <= 0.0) return march(f, a, -1);
  return gauss_hermite_expect(f) - march(f, a, +1);
}

// E[f 1{xi > a}]
double expect_above(const ScalarFn& f, double a) {
  if (a == -kInf) return gauss_hermite_expect(f);
  if (a >= kTailCut) return 0.0;
  if (a >= 0.0) return march(f, a, +1);
  return gauss_hermite_expect(f) - march(f, a, -1);
}

}  // namespace

double std_normal_cdf(double z) {
  require_finite(z, "std_normal_cdf");
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

double std_normal_pdf(double z) {
  require_finite(z, "std_normal_pdf");
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

QuadratureRule make_gauss_hermite(int order) {
  if (order < 16) throw ParameterError("Gauss-Hermite order must be >= 16");
  // Jacobi matrix of the probabilists' Hermite recurrence He_{k+1} = x He_k - k He_{k-1}.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("Gauss-Hermite eigen solve failed");

  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  // Symmetrize: the exact rule is symmetric about 0.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

const QuadratureRule& default_gauss_hermite() {
  static const QuadratureRule rule = make_gauss_hermite(96);
  return rule;
}

double normal_expect(const ScalarFn& f, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("normal_expect: NaN bound");
  if (!(lo < hi)) return 0.0;
  if (lo == -kInf) return expect_below(f, hi);
  if (hi == kInf) return expect_above(f, lo);
  return panels(f, std::max(lo, -kTailCut), std::min(hi, kTailCut));
}

double lognormal_expect(const ScalarFn& f, double x, double y,
                        std::optional<double> restrict_below) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("lognormal_expect: x must be >= 0");
  require_finite(y, "lognormal_expect");
  if (x == 0.0) {
    if (restrict_below && !(*restrict_below > 0.0)) return 0.0;
    return checked(f, std::exp(y));
  }
  const double shift = y - 0.5 * x * x;
  ScalarFn g = [&f, x, shift](double s) { return f(std::exp(x * s + shift)); };
  return normal_expect(g, -kInf, restrict_below.value_or(kInf));
}

RootBracket RootBracket::evaluate(const ScalarFn& f, double lo, double hi) {
  if (!(lo < hi)) throw BracketError("root bracket requires lo < hi");
  RootBracket b{lo, hi, f(lo), f(hi)};
  if (std::isnan(b.f_lo) || std::isnan(b.f_hi) || b.f_lo * b.f_hi > 0.0) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]: f = (" << b.f_lo << ", " << b.f_hi << ")";
    throw BracketError(os.str());
  }
  return b;
}

double find_root(const ScalarFn& f, const RootBracket& bracket, double tol) {
  if (!(tol > 0.0)) throw ParameterError("find_root: tol must be positive");
  if (!(bracket.lo < bracket.hi) || bracket.f_lo * bracket.f_hi > 0.0)
    throw BracketError("find_root: invalid bracket");
  if (bracket.f_lo == 0.0) return bracket.lo;
  if (bracket.f_hi == 0.0) return bracket.hi;

  boost::uintmax_t iterations = kMaxRootIterations;
  // Width test, or the bracket has collapsed to a few ulps.
  auto width_ok = [tol](double a, double b) {
    const double w = std::abs(b - a);
    return w <= tol || w <= 4.0 * std::numeric_limits<double>::epsilon() *
                                 std::min(std::abs(a), std::abs(b));
  };
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&f](double x) { return f(x); }, bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi,
      width_ok, iterations);
  if (iterations >= kMaxRootIterations && !width_ok(a, b))
    throw ConvergenceError("find_root: iteration cap exceeded");
  return 0.5 * (a + b);
}

RootBracket expand_bracket(const ScalarFn& f, double lo, double hi, double lower_limit,
                           double upper_limit, int max_expansions) {
  if (!(lo < hi)) throw BracketError("expand_bracket requires lo < hi");
  lo = std::max(lo, lower_limit);
  hi = std::min(hi, upper_limit);
  double f_lo = f(lo);
  double f_hi = f(hi);
  double width = hi - lo;
  for (int i = 0; i < max_expansions; ++i) {
    if (f_lo * f_hi <= 0.0) return RootBracket{lo, hi, f_lo, f_hi};
    // Move the end with the smaller |f| outward; it is the one closer to the root
    // for a monotone f.
    const bool grow_low = std::abs(f_lo) < std::abs(f_hi);
    if ((grow_low && lo > lower_limit) || hi >= upper_limit) {
      const double next = std::max(lower_limit, lo - width);
      if (next == lo) break;
      hi = lo;
      f_hi = f_lo;
      lo = next;
      f_lo = f(lo);
    } else {
      const double next = std::min(upper_limit, hi + width);
      if (next == hi) break;
      lo = hi;
      f_lo = f_hi;
      hi = next;
      f_hi = f(hi);
    }
    width *= 2.0;
  }
  if (f_lo * f_hi <= 0.0) return RootBracket{lo, hi, f_lo, f_hi};
  std::ostringstream os;
  os << "could not bracket a root (last interval [" << lo << ", " << hi << "])";
  throw BracketError(os.str());
}

double invert_monotone(const ScalarFn& F, double target, double lo, double hi_hint, double tol) {
  const double f_lo = F(lo) - target;
  if (f_lo > 0.0) throw BracketError("invert_monotone: F(lo) exceeds target");
  if (f_lo == 0.0) return lo;
  double step = hi_hint > lo ? hi_hint - lo : 1.0;
  double hi = lo + step;
  double f_hi = F(hi) - target;
  double a = lo;
  double fa = f_lo;
  int expansions = 0;
  while (f_hi < 0.0) {
    if (++expansions > 200 || !std::isfinite(hi))
      throw BracketError("invert_monotone: unbounded inverse (expansion cap reached)");
    a = hi;
    fa = f_hi;
    step *= 2.0;
    hi = lo + step;
    f_hi = F(hi) - target;
  }
  return find_root([&F, target](double x) { return F(x) - target; }, RootBracket{a, hi, fa, f_hi},
                   tol);
}

double integrate_1d(const ScalarFn& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw ParameterError("integrate_1d: tol must be positive");
  if (a == b) return 0.0;
  // Boost floors each panel's error at 2 eps |K|; relative targets much below 1e-10
  // cannot be met by bisection and only exhaust the depth. The Kronrod value is
  // far more accurate than the |K - G| estimate on smooth integrands.
  const double rel = std::clamp(tol, 1e-10, 1e-8);
  double error = 0.0;
  double l1 = 0.0;
  const double value = Kronrod::integrate([&f](double s) { return checked(f, s); }, a, b, 15, rel,
                                          &error, &l1);
  if (error > std::max(tol, 1e-9 * l1)) {
    std::ostringstream os;
    os << "integrate_1d: subdivision cap reached on [" << a << ", " << b << "] (error estimate "
       << error << ")";
    throw ConvergenceError(os.str());
  }
  return value;
}

}  // namespace gda::numerics
