#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gda {

/// Coefficients on [start, next start). The first segment starts at 0.
struct MarketSegment {
  double start = 0.0;
  Eigen::VectorXd mu;     // drift per year
  Eigen::MatrixXd sigma;  // volatility per sqrt(year), d x d
};

/// Deterministic piecewise-constant market on [0, T], right-continuous.
class MarketModel {
 public:
  MarketModel(double horizon, std::vector<MarketSegment> segments);

  static MarketModel constant(double horizon, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma);
  static MarketModel constant_1d(double horizon, double mu, double sigma);

  int d() const { return d_; }
  double horizon() const { return T_; }
  const std::vector<MarketSegment>& segments() const { return segments_; }
  /// Segment start times (sorted, first is 0).
  std::vector<double> breakpoints() const;

  /// Index of the segment in force at t; t = T maps to the last segment.
  std::size_t segment_index(double t) const;
  const Eigen::VectorXd& mu(double t) const { return segments_[segment_index(t)].mu; }
  const Eigen::MatrixXd& sigma(double t) const { return segments_[segment_index(t)].sigma; }
  const Eigen::VectorXd& lambda(double t) const { return lambda_[segment_index(t)]; }

  /// sup_t |lambda(t)|.
  double lambda_sup() const;
  /// Integral of |lambda|^2 over [t, T].
  double integrated_lambda_sq(double t) const;
  /// Smallest squared singular value of sigma over all segments (the ellipticity constant c1).
  double ellipticity() const;

 private:
  double T_;
  int d_;
  std::vector<MarketSegment> segments_;
  std::vector<Eigen::VectorXd> lambda_;
};

/// lambda(t) = sigma(t)^{-1} mu(t).
Eigen::VectorXd market_price_of_risk(const MarketModel& market, double t);

/// Nodes 0 = t_0 < ... < t_N = T at spacing <= step, including every breakpoint.
std::vector<double> make_time_grid(const MarketModel& market, double step);

}  // namespace gda
