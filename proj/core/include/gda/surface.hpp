#pragma once

#include <vector>

#include "gda/preference.hpp"

namespace gda {

/// Everything known about the GDA value surface at one point.
/// x = sqrt(v); delta g = exp(y - x^2/2 + H).
struct SurfacePoint {
  double x = 0.0;
  double y = 0.0;
  double g = 0.0;
  double H = 0.0;
  double H_x = 0.0;
  double H_y = 0.0;
  double g_v = 0.0;
  double g_y = 0.0;
  double m = 0.0;
};

struct HGradient {
  double H_x;
  double H_y;
};

struct GPartials {
  double g;
  double g_v;
  double g_y;
};

struct CStar {
  double value;
  bool degenerate;  // beta == 0: the equation collapses to c = 0
};

/// Root of c + beta c N(c) + beta N'(c) = 0 (negative for beta > 0).
CStar c_star(double beta);

/// GDA value g(v, y) of a LogNormal(y - v/2, v) outcome and its derivatives,
/// computed through H(x, y) with x = sqrt(v).
class GdaSurface {
 public:
  /// Below this x (and delta != 1) values are interpolated linearly in x^2 between
  /// the closed-form boundary limits and the solved value at the crossover.
  static constexpr double kCrossover = 1e-4;

  GdaSurface(Utility u, GdaParams params, double root_tol = 1e-14);

  const Utility& utility() const { return u_; }
  const GdaParams& params() const { return params_; }

  double solve_H(double x, double y) const;
  HGradient grad_H(double x, double y) const;
  /// H_x through U'' instead of (xi - x); agrees with grad_H().H_x.
  double H_x_second_form(double x, double y) const;

  double g(double v, double y) const;
  GPartials g_partials(double v, double y) const;
  double m(double x, double y) const;
  double mrs(double v, double y) const;
  SurfacePoint evaluate(double x, double y) const;

  /// H(0, y): log delta for delta <= 1, c(y) otherwise.
  double boundary_H(double y) const;
  /// Root of U(e^{z+y}/delta) = U(e^y) + beta (U(e^y) - U(e^{z+y})) in (0, log delta); delta > 1.
  double c_of_y(double y) const;

 private:
  struct Moments;
  struct Limits {
    double H;
    double Hx_over_x;
    double H_y;
    double m;
  };

  double solve_H_direct(double x, double y) const;
  Moments moments(double x, double y, double H, bool want_second) const;
  Limits boundary_limits(double y) const;
  SurfacePoint evaluate_direct(double x, double y) const;
  SurfacePoint evaluate_boundary(double y) const;
  SurfacePoint assemble(double x, double y, double H, double hx_over_x, double H_y,
                        double m) const;

  Utility u_;
  GdaParams params_;
  double root_tol_;
};

struct IndifferenceRow {
  double v;
  double y_on_curve;
  double mrs;
};

/// Indifference curve g(v, y) = g(0, y0) through (0, y0) with the MRS along it.
std::vector<IndifferenceRow> indifference_curve(const GdaSurface& surface,
                                                const std::vector<double>& v_grid,
                                                double y0 = 0.0);

}  // namespace gda
