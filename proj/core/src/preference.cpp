#include "gda/preference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gda/errors.hpp"
#include "gda/numerics.hpp"

namespace gda {

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> w(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) w[i] = std::exp(a + (b - a) * i / (n - 1));
  return w;
}

std::string crra_description(double rho) {
  std::ostringstream os;
  if (rho == 1.0)
    os << "log";
  else
    os << "crra(rho=" << rho << ")";
  return os.str();
}

}  // namespace

Utility Utility::crra(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("CRRA rho must be positive");
  Utility u;
  u.rho_ = rho;
  u.description_ = crra_description(rho);
  return u;
}

Utility Utility::custom(CustomSpec spec) {
  if (!spec.u || !spec.d1) throw ParameterError("custom utility needs U and U'");
  if (spec.order < 1 || spec.order > 3) throw ParameterError("custom utility order must be 1..3");
  if (spec.order >= 2 && !spec.d2) throw ParameterError("order >= 2 requires U''");
  if (spec.order >= 3 && !spec.d3) throw ParameterError("order 3 requires U'''");
  if (!(spec.nu >= 0.0)) throw ParameterError("growth exponent nu must be >= 0");

  for (double w : log_grid(1e-6, 1e6, 49)) {
    const double d1 = spec.d1(w);
    if (!(d1 > 0.0)) {
      std::ostringstream os;
      os << "custom utility: U'(" << w << ") = " << d1 << " is not positive";
      throw ParameterError(os.str());
    }
    double total = std::abs(spec.u(w)) + std::abs(d1);
    if (spec.order >= 2) total += std::abs(spec.d2(w));
    if (spec.order >= 3) total += std::abs(spec.d3(w));
    const double ratio = total / (std::pow(w, spec.nu) + std::pow(w, -spec.nu));
    if (!std::isfinite(ratio)) throw ParameterError("custom utility violates the growth bound");
  }

  Utility u;
  u.description_ = spec.description;
  u.custom_ = std::make_shared<const CustomSpec>(std::move(spec));
  return u;
}

double Utility::operator()(double w) const {
  if (custom_) return custom_->u(w);
  if (rho_ == 1.0) return std::log(w);
  return std::pow(w, 1.0 - rho_) / (1.0 - rho_);
}

double Utility::d1(double w) const {
  if (custom_) return custom_->d1(w);
  if (rho_ == 1.0) return 1.0 / w;
  return std::pow(w, -rho_);
}

double Utility::d2(double w) const {
  if (custom_) {
    if (!custom_->d2) throw ParameterError("utility does not provide U''");
    return custom_->d2(w);
  }
  if (rho_ == 1.0) return -1.0 / (w * w);
  return -rho_ * std::pow(w, -rho_ - 1.0);
}

double Utility::d3(double w) const {
  if (custom_) {
    if (!custom_->d3) throw ParameterError("utility does not provide U'''");
    return custom_->d3(w);
  }
  if (rho_ == 1.0) return 2.0 / (w * w * w);
  return rho_ * (rho_ + 1.0) * std::pow(w, -rho_ - 2.0);
}

double Utility::inverse(double value) const {
  if (custom_) {
    if (custom_->inverse) return custom_->inverse(value);
    // Solve U(e^s) = value; U is increasing so the residual is monotone in s.
    auto f = [this, value](double s) { return custom_->u(std::exp(s)) - value; };
    const auto bracket = numerics::expand_bracket(f, -1.0, 1.0, -700.0, 700.0, 200);
    return std::exp(numerics::find_root(f, bracket, 1e-15));
  }
  if (rho_ == 1.0) return std::exp(value);
  const double base = (1.0 - rho_) * value;
  if (!(base > 0.0)) {
    std::ostringstream os;
    os << "value " << value << " is outside the range of " << description_;
    throw DomainError(os.str());
  }
  return std::pow(base, 1.0 / (1.0 - rho_));
}

double Utility::rho() const {
  if (custom_) throw ParameterError("rho is defined for CRRA utilities only");
  return rho_;
}

int Utility::order() const { return custom_ ? custom_->order : 3; }

double Utility::nu() const {
  if (custom_) return custom_->nu;
  return std::abs(1.0 - rho_) + rho_ + 2.0;
}

double Utility::c0_estimate() const {
  if (!custom_) return 1.0 / rho_;
  if (order() < 2) return numerics::kInf;
  double c0 = 0.0;
  for (double w : log_grid(1e-6, 1e6, 97)) {
    const double d2w = d2(w);
    if (!(d2w < 0.0)) return numerics::kInf;
    c0 = std::max(c0, -d1(w) / (w * d2w));
  }
  return c0;
}

Utility Utility::affine(double a1, double a0) const {
  if (!(a1 > 0.0)) throw ParameterError("affine transform needs a positive slope");
  const Utility base = *this;
  CustomSpec spec;
  spec.u = [base, a1, a0](double w) { return a1 * base(w) + a0; };
  spec.d1 = [base, a1](double w) { return a1 * base.d1(w); };
  if (order() >= 2) spec.d2 = [base, a1](double w) { return a1 * base.d2(w); };
  if (order() >= 3) spec.d3 = [base, a1](double w) { return a1 * base.d3(w); };
  spec.inverse = [base, a1, a0](double v) { return base.inverse((v - a0) / a1); };
  spec.order = order();
  spec.nu = nu();
  std::ostringstream os;
  os << a1 << "*" << description_ << "+" << a0;
  spec.description = os.str();
  return custom(std::move(spec));
}

void GdaParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be > 0");
}

void validate(const OutcomeDistribution& dist) {
  if (const auto* ln = std::get_if<LogNormal>(&dist)) {
    if (!std::isfinite(ln->mean_log)) throw ParameterError("mean_log must be finite");
    if (!(ln->var_log >= 0.0) || !std::isfinite(ln->var_log))
      throw ParameterError("var_log must be >= 0");
    return;
  }
  const auto& e = std::get<Empirical>(dist);
  if (e.values.empty() || e.values.size() != e.probs.size())
    throw ParameterError("empirical distribution needs matching non-empty values/probs");
  double total = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (!(e.values[i] > 0.0)) throw ParameterError("empirical values must be positive");
    if (!(e.probs[i] >= 0.0)) throw ParameterError("empirical probabilities must be >= 0");
    total += e.probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("empirical probabilities must sum to 1");
}

namespace {

// E[f(Y) 1{Y < cut}] (cut = +inf for the full expectation).
double expect(const OutcomeDistribution& dist, const numerics::ScalarFn& f,
              double cut = numerics::kInf) {
  if (const auto* ln = std::get_if<LogNormal>(&dist)) {
    const double x = std::sqrt(ln->var_log);
    const double y = ln->mean_log + 0.5 * ln->var_log;
    if (cut == numerics::kInf) return numerics::lognormal_expect(f, x, y);
    if (!(cut > 0.0)) return 0.0;
    if (x == 0.0) return std::exp(ln->mean_log) < cut ? f(std::exp(ln->mean_log)) : 0.0;
    return numerics::lognormal_expect(f, x, y, (std::log(cut) - ln->mean_log) / x);
  }
  const auto& e = std::get<Empirical>(dist);
  double sum = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i)
    if (e.values[i] < cut && e.probs[i] > 0.0) sum += e.probs[i] * f(e.values[i]);
  return sum;
}

double penalty(const Utility& u, const OutcomeDistribution& dist, double threshold) {
  const double ut = u(threshold);
  return expect(dist, [&u, ut](double w) { return ut - u(w); }, threshold);
}

void require_delta_above_one(const GdaParams& params, const char* what) {
  params.validate();
  if (!(params.delta > 1.0)) {
    std::ostringstream os;
    os << what << " requires delta > 1 (got " << params.delta << ")";
    throw ParameterError(os.str());
  }
}

}  // namespace

double gda_residual(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                    double p) {
  const double eu = expect(dist, [&u](double w) { return u(w); });
  double r = u(p) - eu;
  if (params.beta > 0.0) r += params.beta * penalty(u, dist, params.delta * p);
  return r;
}

double gda_value(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                 double tol) {
  params.validate();
  validate(dist);
  const double eu = expect(dist, [&u](double w) { return u(w); });
  const double p0 = u.inverse(eu);
  if (params.beta == 0.0) return p0;

  auto f = [&](double s) {
    const double p = std::exp(s);
    return u(p) - eu + params.beta * penalty(u, dist, params.delta * p);
  };
  const double s0 = std::log(p0);
  // The penalty is nonnegative, so the root lies at or below the EU certainty equivalent.
  const auto bracket = numerics::expand_bracket(f, s0 - 0.25, s0 + 1e-9);
  return std::exp(numerics::find_root(f, bracket, tol));
}

double psi(const Utility& u, const GdaParams& params, double w, double tol) {
  require_delta_above_one(params, "psi");
  if (!(w > 0.0)) throw DomainError("psi: w must be positive");
  if (params.beta == 0.0) return w;
  const double target = (1.0 + params.beta) * u(w);
  auto f = [&](double s) {
    const double p = std::exp(s);
    return u(p) + params.beta * u(params.delta * p) - target;
  };
  const double lw = std::log(w);
  return std::exp(numerics::find_root(
      f, numerics::RootBracket::evaluate(f, lw - std::log(params.delta), lw), tol));
}

double phi(const Utility& u, const GdaParams& params, double w) {
  require_delta_above_one(params, "phi");
  if (!(w > 0.0)) throw DomainError("phi: w must be positive");
  if (params.beta == 0.0) return w;
  return u.inverse((u(w) + params.beta * u(params.delta * w)) / (1.0 + params.beta));
}

double certainty_equivalent(const Utility& u, const GdaParams& params,
                            const OutcomeDistribution& dist, double tol) {
  const double eta = gda_value(u, params, dist, tol);
  if (params.delta <= 1.0) return eta;
  return phi(u, params, eta);
}

}  // namespace gda
