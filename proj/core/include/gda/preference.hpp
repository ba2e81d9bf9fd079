#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gda {

/// Strictly increasing utility with derivatives up to third order.
/// CRRA: U(w) = w^{1-rho}/(1-rho), log at rho = 1.
class Utility {
 public:
  using Fn = std::function<double(double)>;

  struct CustomSpec {
    Fn u;
    Fn d1;
    Fn d2;                  // may be empty when order < 2
    Fn d3;                  // may be empty when order < 3
    Fn inverse;             // optional; solved numerically when empty
    int order = 3;          // declared regularity order n
    double nu = 1.0;        // growth exponent in |U|+...+|U^(n)| <= C(w^nu + w^-nu)
    std::string description = "custom";
  };

  static Utility crra(double rho);
  /// Validates U' > 0 and the growth bound on a log grid over [1e-6, 1e6].
  static Utility custom(CustomSpec spec);

  double operator()(double w) const;
  double d1(double w) const;
  double d2(double w) const;
  double d3(double w) const;
  double inverse(double u) const;

  bool is_crra() const { return !custom_; }
  double rho() const;  // CRRA only
  int order() const;
  double nu() const;
  const std::string& description() const { return description_; }

  /// Sampled Assumption-1 constant: sup_w -U'(w)/(w U''(w)) over [1e-6, 1e6].
  /// Infinite when U'' >= 0 somewhere on the grid.
  double c0_estimate() const;

  /// a1 * U + a0 with a1 > 0, as a custom utility.
  Utility affine(double a1, double a0) const;

 private:
  Utility() = default;
  double rho_ = 1.0;
  std::shared_ptr<const CustomSpec> custom_;
  std::string description_;
};

struct GdaParams {
  double beta = 0.0;
  double delta = 1.0;

  void validate() const;
};

/// Y = exp(mean_log + sqrt(var_log) xi).
struct LogNormal {
  double mean_log = 0.0;
  double var_log = 0.0;

  /// Law of W_T/W_t for cumulative variance v and cumulative return y.
  static LogNormal from_vy(double v, double y) { return {y - 0.5 * v, v}; }
};

struct Empirical {
  std::vector<double> values;
  std::vector<double> probs;
};

using OutcomeDistribution = std::variant<LogNormal, Empirical>;

void validate(const OutcomeDistribution& dist);

inline constexpr double kDefaultRootTol = 1e-13;

/// Residual U(p) - E U(Y) + beta E[(U(delta p) - U(Y))_+]; increasing in p, zero at eta.
double gda_residual(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                    double p);

/// The GDA value eta(Y).
double gda_value(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                 double tol = kDefaultRootTol);

/// Solves U(psi) + beta U(delta psi) = (1 + beta) U(w); delta > 1.
double psi(const Utility& u, const GdaParams& params, double w, double tol = kDefaultRootTol);

/// U^{-1}((U(w) + beta U(delta w)) / (1 + beta)), the inverse of psi; delta > 1.
double phi(const Utility& u, const GdaParams& params, double w);

double certainty_equivalent(const Utility& u, const GdaParams& params,
                            const OutcomeDistribution& dist, double tol = kDefaultRootTol);

}  // namespace gda
