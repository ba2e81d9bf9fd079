#include "gda/surface.hpp"

#include <cmath>
#include <sstream>

#include "gda/errors.hpp"
#include "gda/numerics.hpp"

namespace gda {

using numerics::kInf;
using numerics::normal_expect;
using numerics::std_normal_cdf;
using numerics::std_normal_pdf;

CStar c_star(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("c_star: beta must be >= 0");
  if (beta == 0.0) return {0.0, true};
  auto f = [beta](double c) { return c + beta * c * std_normal_cdf(c) + beta * std_normal_pdf(c); };
  const double lo = -beta * std_normal_pdf(0.0) - 1e-3;
  return {numerics::find_root(f, numerics::RootBracket::evaluate(f, lo, 0.0), 1e-16), false};
}

// Gaussian moments entering the gradient formulas, split into the full expectation
// and the part below the disappointment threshold xi < H/x.
struct GdaSurface::Moments {
  double A1 = 0, A1b = 0;  // E[U'(Z) Z]
  double Ax = 0, Axb = 0;  // E[U'(Z) Z (xi - x)]
  double B = 0, Bb = 0;    // E[U''(Z) Z^2]
};

GdaSurface::GdaSurface(Utility u, GdaParams params, double root_tol)
    : u_(std::move(u)), params_(params), root_tol_(root_tol) {
  params_.validate();
  if (!(root_tol_ > 0.0)) throw ParameterError("root tolerance must be positive");
}

double GdaSurface::c_of_y(double y) const {
  if (!(params_.delta > 1.0)) throw ParameterError("c(y) is defined for delta > 1");
  const double ld = std::log(params_.delta);
  if (params_.beta == 0.0) return ld;
  const double uy = u_(std::exp(y));
  auto f = [&](double z) {
    const double w = std::exp(z + y);
    return u_(w / params_.delta) - uy - params_.beta * (uy - u_(w));
  };
  return numerics::find_root(f, numerics::RootBracket::evaluate(f, 0.0, ld), root_tol_);
}

double GdaSurface::boundary_H(double y) const {
  if (params_.delta <= 1.0) return std::log(params_.delta);
  return c_of_y(y);
}

double GdaSurface::solve_H_direct(double x, double y) const {
  const double yt = y - 0.5 * x * x;
  const double delta = params_.delta;
  const double beta = params_.beta;
  auto U = [this](double w) { return u_(w); };
  const double eu = numerics::lognormal_expect(U, x, y);
  const double z_eu = std::log(delta * u_.inverse(eu)) - yt;
  if (beta == 0.0) return z_eu;

  auto F = [&](double z) {
    const double w = std::exp(z + yt);
    const double uw = u_(w);
    const double below = normal_expect(
        [&](double s) { return uw - u_(std::exp(x * s + yt)); }, -kInf, z / x);
    return u_(w / delta) - eu + beta * below;
  };
  // The disappointment penalty is nonnegative, so H <= z_eu.
  const auto bracket = numerics::expand_bracket(F, z_eu - 0.25, z_eu + 1e-9);
  return numerics::find_root(F, bracket, root_tol_);
}

double GdaSurface::solve_H(double x, double y) const {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("solve_H: x must be >= 0");
  if (!std::isfinite(y)) throw DomainError("solve_H: y must be finite");
  const double yy = u_.is_crra() ? 0.0 : y;  // H does not depend on y for CRRA
  if (x == 0.0) return boundary_H(yy);
  if (params_.delta != 1.0 && x < kCrossover) {
    const double t = (x / kCrossover) * (x / kCrossover);
    return (1.0 - t) * boundary_H(yy) + t * solve_H_direct(kCrossover, yy);
  }
  return solve_H_direct(x, yy);
}

GdaSurface::Moments GdaSurface::moments(double x, double y, double H, bool want_second) const {
  const double yt = y - 0.5 * x * x;
  const double a = H / x;
  Moments mo;
  auto pair = [a](const numerics::ScalarFn& f, double& full, double& below) {
    full = normal_expect(f);
    below = normal_expect(f, -kInf, a);
  };
  pair([&](double s) {
    const double z = std::exp(x * s + yt);
    return u_.d1(z) * z;
  }, mo.A1, mo.A1b);
  pair([&](double s) {
    const double z = std::exp(x * s + yt);
    return u_.d1(z) * z * (s - x);
  }, mo.Ax, mo.Axb);
  if (want_second) {
    pair([&](double s) {
      const double z = std::exp(x * s + yt);
      return u_.d2(z) * z * z;
    }, mo.B, mo.Bb);
  }
  return mo;
}

GdaSurface::Limits GdaSurface::boundary_limits(double y) const {
  const double beta = params_.beta;
  const double delta = params_.delta;
  const double ey = std::exp(y);
  const double up = u_.d1(ey);
  const double upp = u_.d2(ey);
  Limits lim;
  lim.m = -up / (upp * ey);
  if (delta < 1.0) {
    lim.H = std::log(delta);
    lim.Hx_over_x = upp * ey / up + 1.0;
    lim.H_y = 0.0;
    return lim;
  }
  const double c = c_of_y(y);
  const double w = std::exp(c + y);
  const double den = u_.d1(w / delta) / delta + beta * u_.d1(w);
  lim.H = c;
  lim.Hx_over_x = upp * ey * (beta + 1.0) / (den * std::exp(c)) + 1.0;
  lim.H_y = up * ey * (beta + 1.0) / (den * w) - 1.0;
  return lim;
}

SurfacePoint GdaSurface::assemble(double x, double y, double H, double hxx, double H_y,
                                  double m) const {
  SurfacePoint p;
  p.x = x;
  p.y = y;
  p.H = H;
  p.H_x = hxx * x;
  p.H_y = H_y;
  p.g = std::exp(y - 0.5 * x * x + H) / params_.delta;
  p.g_v = (-0.5 + 0.5 * hxx) * p.g;
  p.g_y = (1.0 + H_y) * p.g;
  p.m = m;
  return p;
}

SurfacePoint GdaSurface::evaluate_direct(double x, double y) const {
  const double yy = u_.is_crra() ? 0.0 : y;
  const double H = solve_H_direct(x, yy);
  const Moments mo = moments(x, yy, H, true);
  const double beta = params_.beta;
  const double delta = params_.delta;
  const double e = std::exp(H + yy - 0.5 * x * x);
  const double a = H / x;
  const double D = (u_.d1(e / delta) / delta + beta * u_.d1(e) * std_normal_cdf(a)) * e;
  if (!(D > 0.0) || !std::isfinite(D)) {
    std::ostringstream os;
    os << "gradient denominator underflow at x=" << x << ", y=" << y;
    throw NumericError(os.str());
  }
  const double num_y = mo.A1 + beta * mo.A1b;
  const double H_x = (mo.Ax + beta * mo.Axb) / D + x;
  const double H_y = u_.is_crra() ? 0.0 : num_y / D - 1.0;
  const double m_den =
      -(mo.B + beta * mo.Bb) + beta * u_.d1(e) * e * std_normal_pdf(a) / x;
  return assemble(x, y, H, H_x / x, H_y, num_y / m_den);
}

SurfacePoint GdaSurface::evaluate_boundary(double y) const {
  const double yy = u_.is_crra() ? 0.0 : y;
  const Limits lim = boundary_limits(yy);
  return assemble(0.0, y, lim.H, lim.Hx_over_x, u_.is_crra() ? 0.0 : lim.H_y, lim.m);
}

SurfacePoint GdaSurface::evaluate(double x, double y) const {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("evaluate: x must be >= 0");
  if (!std::isfinite(y)) throw DomainError("evaluate: y must be finite");
  if (params_.delta == 1.0) {
    if (x == 0.0)
      throw BoundaryError("surface is not differentiable at x = 0 when delta = 1");
    return evaluate_direct(x, y);
  }
  if (x == 0.0) return evaluate_boundary(y);
  if (x < kCrossover) {
    const double yy = u_.is_crra() ? 0.0 : y;
    const Limits b = boundary_limits(yy);
    const SurfacePoint s = evaluate_direct(kCrossover, y);
    const double t = (x / kCrossover) * (x / kCrossover);
    auto lerp = [t](double p, double q) { return (1.0 - t) * p + t * q; };
    const double H_y = u_.is_crra() ? 0.0 : lerp(b.H_y, s.H_y);
    return assemble(x, y, lerp(b.H, s.H), lerp(b.Hx_over_x, s.H_x / kCrossover), H_y,
                    lerp(b.m, s.m));
  }
  return evaluate_direct(x, y);
}

HGradient GdaSurface::grad_H(double x, double y) const {
  const SurfacePoint p = evaluate(x, y);
  return {p.H_x, p.H_y};
}

double GdaSurface::H_x_second_form(double x, double y) const {
  if (!(x > 0.0)) throw DomainError("H_x_second_form: x must be > 0");
  if (params_.delta != 1.0 && x < kCrossover) return grad_H(x, y).H_x;
  const double yy = u_.is_crra() ? 0.0 : y;
  const double H = solve_H_direct(x, yy);
  const Moments mo = moments(x, yy, H, true);
  const double beta = params_.beta;
  const double delta = params_.delta;
  const double e = std::exp(H + yy - 0.5 * x * x);
  const double a = H / x;
  const double D = (u_.d1(e / delta) / delta + beta * u_.d1(e) * std_normal_cdf(a)) * e;
  if (!(D > 0.0) || !std::isfinite(D)) throw NumericError("gradient denominator underflow");
  return (x * (mo.B + beta * mo.Bb) - beta * u_.d1(e) * e * std_normal_pdf(a)) / D + x;
}

double GdaSurface::g(double v, double y) const {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("g: v must be >= 0");
  const double x = std::sqrt(v);
  return std::exp(y - 0.5 * v + solve_H(x, y)) / params_.delta;
}

GPartials GdaSurface::g_partials(double v, double y) const {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("g_partials: v must be >= 0");
  const SurfacePoint p = evaluate(std::sqrt(v), y);
  return {p.g, p.g_v, p.g_y};
}

double GdaSurface::m(double x, double y) const { return evaluate(x, y).m; }

double GdaSurface::mrs(double v, double y) const {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("mrs: v must be >= 0");
  return 0.5 / m(std::sqrt(v), y);
}

std::vector<IndifferenceRow> indifference_curve(const GdaSurface& surface,
                                                const std::vector<double>& v_grid, double y0) {
  const double target = std::log(surface.g(0.0, y0));
  std::vector<IndifferenceRow> rows;
  rows.reserve(v_grid.size());
  for (double v : v_grid) {
    double y = y0;
    if (v > 0.0) {
      auto f = [&](double yy) { return std::log(surface.g(v, yy)) - target; };
      // Exact for homothetic utilities; a starting guess otherwise.
      const double guess = y0 - f(y0);
      const auto bracket =
          numerics::expand_bracket(f, guess - 1e-3, guess + 1e-3, -kInf, kInf, 200);
      y = numerics::find_root(f, bracket, 1e-13);
    }
    double mrs = kInf;
    if (!(v == 0.0 && surface.params().delta == 1.0)) mrs = surface.mrs(v, y);
    rows.push_back({v, y, mrs});
  }
  return rows;
}

}  // namespace gda
