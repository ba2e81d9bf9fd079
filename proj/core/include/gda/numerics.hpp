#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace gda::numerics {

using ScalarFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Standard normal distribution function N(z), erfc-based (accurate in both tails).
double std_normal_cdf(double z);
/// N'(z) = exp(-z^2/2) / sqrt(2 pi).
double std_normal_pdf(double z);

/// Gauss–Hermite rule for the standard normal density: sum_i w_i f(x_i) ~ E[f(xi)], xi ~ N(0,1).
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, sum to 1
  int order() const { return static_cast<int>(nodes.size()); }
};

/// Probabilists' Gauss–Hermite rule of the given order (>= 16), built by Golub–Welsch.
QuadratureRule make_gauss_hermite(int order);
/// Shared default rule (order 96), built once.
const QuadratureRule& default_gauss_hermite();

/// E[f(xi) 1{lo < xi < hi}] for xi ~ N(0,1). Either bound may be infinite.
/// The unbounded expectation uses Gauss–Hermite; truncated pieces are integrated from
/// the truncation point outward with Gauss–Legendre panels.
double normal_expect(const ScalarFn& f, double lo = -kInf, double hi = kInf);

/// E[f(e^{x xi + y - x^2/2}) 1{xi < restrict_below}], or the full expectation when
/// restrict_below is empty. Throws EvaluationError if f is non-finite on the support.
double lognormal_expect(const ScalarFn& f, double x, double y,
                        std::optional<double> restrict_below = std::nullopt);

struct RootBracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;

  /// Evaluates f at both ends; throws BracketError when there is no sign change.
  static RootBracket evaluate(const ScalarFn& f, double lo, double hi);
};

inline constexpr int kMaxRootIterations = 200;

/// Bracketed root of a continuous f (TOMS 748 with bisection safeguards).
/// Returns r with f(r) == 0 or a final bracket no wider than tol.
double find_root(const ScalarFn& f, const RootBracket& bracket, double tol = 1e-10);

/// Grows [lo, hi] geometrically around the initial guess until f changes sign.
/// Limits clamp the expansion; throws BracketError if none is found.
RootBracket expand_bracket(const ScalarFn& f, double lo, double hi,
                           double lower_limit = -kInf, double upper_limit = kInf,
                           int max_expansions = 60);

/// Solves F(x) = target for strictly increasing F with F(lo) <= target,
/// doubling the distance to hi_hint until F(hi) >= target.
double invert_monotone(const ScalarFn& F, double target, double lo, double hi_hint,
                       double tol = 1e-10);

/// Adaptive Gauss–Kronrod estimate of the integral of f over [a, b].
double integrate_1d(const ScalarFn& f, double a, double b, double tol = 1e-9);

}  // namespace gda::numerics
