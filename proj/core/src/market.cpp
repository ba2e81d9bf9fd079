#include "gda/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gda/errors.hpp"

namespace gda {

MarketModel::MarketModel(double horizon, std::vector<MarketSegment> segments)
    : T_(horizon), d_(0), segments_(std::move(segments)) {
  if (!(T_ > 0.0) || !std::isfinite(T_)) throw ModelError("horizon T must be positive");
  if (segments_.empty()) throw ModelError("market needs at least one segment");
  if (segments_.front().start != 0.0) throw ModelError("first segment must start at t = 0");
  d_ = static_cast<int>(segments_.front().mu.size());
  if (d_ < 1) throw ModelError("market dimension must be >= 1");

  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (i > 0 && !(s.start > segments_[i - 1].start))
      throw ModelError("segment start times must be strictly increasing");
    if (!(s.start < T_)) throw ModelError("segment starts must lie in [0, T)");
    if (s.mu.size() != d_ || s.sigma.rows() != d_ || s.sigma.cols() != d_)
      throw ModelError("mu/sigma dimensions are inconsistent");
    if (!s.mu.allFinite() || !s.sigma.allFinite()) throw ModelError("non-finite coefficients");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.sigma);
    const double smin = svd.singularValues()(d_ - 1);
    if (!(smin > 1e-12 * std::max(1.0, svd.singularValues()(0)))) {
      std::ostringstream os;
      os << "sigma is singular on the segment starting at t=" << s.start;
      throw ModelError(os.str());
    }
    lambda_.push_back(s.sigma.partialPivLu().solve(s.mu));
  }
}

MarketModel MarketModel::constant(double horizon, const Eigen::VectorXd& mu,
                                  const Eigen::MatrixXd& sigma) {
  return MarketModel(horizon, {MarketSegment{0.0, mu, sigma}});
}

MarketModel MarketModel::constant_1d(double horizon, double mu, double sigma) {
  return constant(horizon, Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, sigma));
}

std::vector<double> MarketModel::breakpoints() const {
  std::vector<double> out;
  for (const auto& s : segments_) out.push_back(s.start);
  return out;
}

std::size_t MarketModel::segment_index(double t) const {
  if (!(t >= 0.0 && t <= T_)) {
    std::ostringstream os;
    os << "time " << t << " is outside [0, " << T_ << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const MarketSegment& s) { return v < s.start; });
  return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

double MarketModel::lambda_sup() const {
  double s = 0.0;
  for (const auto& l : lambda_) s = std::max(s, l.norm());
  return s;
}

double MarketModel::integrated_lambda_sq(double t) const {
  double total = 0.0;
  for (std::size_t i = segment_index(t); i < segments_.size(); ++i) {
    const double a = std::max(t, segments_[i].start);
    const double b = i + 1 < segments_.size() ? segments_[i + 1].start : T_;
    total += (b - a) * lambda_[i].squaredNorm();
  }
  return total;
}

double MarketModel::ellipticity() const {
  double c1 = std::numeric_limits<double>::infinity();
  for (const auto& s : segments_) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.sigma);
    const double smin = svd.singularValues()(d_ - 1);
    c1 = std::min(c1, smin * smin);
  }
  return c1;
}

Eigen::VectorXd market_price_of_risk(const MarketModel& market, double t) {
  return market.lambda(t);
}

std::vector<double> make_time_grid(const MarketModel& market, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("grid step must be positive");
  std::vector<double> ends = market.breakpoints();
  ends.push_back(market.horizon());
  std::vector<double> grid;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) {
    const double a = ends[i];
    const double b = ends[i + 1];
    // Slightly below ceil so that e.g. 3 / 0.01 does not pick up a sliver interval.
    const auto n = static_cast<long>(std::ceil((b - a) / step - 1e-9));
    for (long k = 0; k < n; ++k) grid.push_back(a + (b - a) * static_cast<double>(k) / n);
  }
  grid.push_back(market.horizon());
  return grid;
}

}  // namespace gda
