#include "gda/verification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "gda/errors.hpp"
#include "gda/numerics.hpp"
#include "gda/surface.hpp"

namespace gda {

void McConfig::validate() const {
  if (n_paths < 2) throw ParameterError("n_paths must be >= 2");
  if (n_steps < 1) throw ParameterError("n_steps must be >= 1");
}

namespace {

constexpr int kBatches = 20;

// GDA value of the empirical law of `sample` (sorted in place).
double empirical_fixed_point(const Utility& u, const GdaParams& params, std::vector<double>& sample) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + u(sample[i]);
  const double eu = prefix[n] / static_cast<double>(n);
  const double p0 = u.inverse(eu);
  if (params.beta == 0.0) return p0;

  auto f = [&](double s) {
    const double p = std::exp(s);
    const double thr = params.delta * p;
    const auto k = static_cast<std::size_t>(
        std::lower_bound(sample.begin(), sample.end(), thr) - sample.begin());
    const double pen = (static_cast<double>(k) * u(thr) - prefix[k]) / static_cast<double>(n);
    return u(p) - eu + params.beta * pen;
  };
  const double s0 = std::log(p0);
  try {
    const auto bracket = numerics::expand_bracket(f, s0 - 0.25, s0 + 1e-9);
    return std::exp(numerics::find_root(f, bracket, 1e-14));
  } catch (const BracketError& e) {
    throw ConvergenceError(std::string("Monte-Carlo fixed point: ") + e.what());
  }
}

}  // namespace

McEstimate mc_gda_value(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                        const McConfig& mc) {
  params.validate();
  mc.validate();
  validate(dist);
  const auto* ln = std::get_if<LogNormal>(&dist);
  if (!ln) throw ParameterError("mc_gda_value expects a log-normal outcome");
  if (ln->var_log == 0.0) return {gda_value(u, params, dist), 0.0};

  std::mt19937_64 rng(mc.seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(ln->var_log);
  std::vector<double> draws(mc.n_paths);
  for (double& y : draws) y = std::exp(ln->mean_log + sd * normal(rng));

  const std::size_t per_batch = mc.n_paths / kBatches;
  std::vector<double> batch_values;
  if (per_batch >= 2) {
    for (int b = 0; b < kBatches; ++b) {
      std::vector<double> chunk(draws.begin() + b * per_batch, draws.begin() + (b + 1) * per_batch);
      batch_values.push_back(empirical_fixed_point(u, params, chunk));
    }
  }
  const double estimate = empirical_fixed_point(u, params, draws);
  double std_err = 0.0;
  if (batch_values.size() > 1) {
    const double mean = std::accumulate(batch_values.begin(), batch_values.end(), 0.0) /
                        static_cast<double>(batch_values.size());
    double ss = 0.0;
    for (double v : batch_values) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(batch_values.size() - 1);
    std_err = std::sqrt(var / static_cast<double>(batch_values.size()));
  }
  return {estimate, std_err};
}

std::vector<double> simulate_wealth(const MarketModel& market, const StrategyPath& path, double t0,
                                    const McConfig& mc) {
  mc.validate();
  const double T = market.horizon();
  if (path.size() == 0) throw ParameterError("empty strategy path");
  if (!(t0 >= path.grid.front() && t0 < T)) throw DomainError("t0 must lie in the path's [t_0, T)");

  // Step boundaries: t0, path nodes and market breakpoints after t0, and T.
  std::vector<double> cuts{t0, T};
  for (double t : path.grid)
    if (t > t0 && t < T) cuts.push_back(t);
  for (double t : market.breakpoints())
    if (t > t0 && t < T) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const std::size_t base_steps = cuts.size() - 1;
  const int sub = static_cast<int>(
      std::max<std::size_t>(1, (static_cast<std::size_t>(mc.n_steps) + base_steps - 1) / base_steps));

  struct Step {
    double drift;  // (pi' mu - |sigma' pi|^2 / 2) h
    Eigen::VectorXd vol;  // sigma' pi sqrt(h)
  };
  std::vector<Step> steps;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    auto it = std::upper_bound(path.grid.begin(), path.grid.end(), a + 1e-14);
    const std::size_t node = static_cast<std::size_t>(std::distance(path.grid.begin(), it)) - 1;
    const Eigen::VectorXd& pi = path.pi[node];
    const Eigen::VectorXd sp = market.sigma(a).transpose() * pi;
    const double h = (b - a) / sub;
    for (int k = 0; k < sub; ++k)
      steps.push_back({(pi.dot(market.mu(a)) - 0.5 * sp.squaredNorm()) * h, sp * std::sqrt(h)});
  }

  std::mt19937_64 rng(mc.seed);
  std::normal_distribution<double> normal;
  const int d = market.d();
  Eigen::VectorXd z(d);
  std::vector<double> out(mc.n_paths);
  for (double& w : out) {
    double logw = 0.0;
    for (const Step& s : steps) {
      for (int j = 0; j < d; ++j) z(j) = normal(rng);
      logw += s.drift + s.vol.dot(z);
    }
    w = std::exp(logw);
  }
  return out;
}

double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& f) {
  if (h.empty() || h.size() != f.size()) throw ParameterError("extrapolation needs matching samples");
  std::vector<double> p = f;
  const std::size_t n = h.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i)
      p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);  // value at 0
  return p[0];
}

namespace {

std::size_t node_index(const StrategyPath& path, double t) {
  auto it = std::lower_bound(path.grid.begin(), path.grid.end(), t);
  std::size_t i = static_cast<std::size_t>(std::distance(path.grid.begin(), it));
  if (i == path.size() || (i > 0 && t - path.grid[i - 1] < path.grid[i] - t)) --i;
  if (std::abs(path.grid[i] - t) > 1e-9) {
    std::ostringstream os;
    os << "time " << t << " is not a node of the strategy path";
    throw DomainError(os.str());
  }
  return i;
}

// Integrals over [t, t + eps) of |sigma' k|^2, k' sigma sigma' pi and k' mu.
struct SpikeMoments {
  double var;
  double cross;
  double ret;
};

SpikeMoments spike(const MarketModel& market, double t, double eps, const Eigen::VectorXd& k,
                   const Eigen::VectorXd& pi) {
  SpikeMoments s{0.0, 0.0, 0.0};
  const auto& seg = market.segments();
  for (std::size_t i = market.segment_index(t); i < seg.size(); ++i) {
    const double a = std::max(t, seg[i].start);
    const double b = std::min(t + eps, i + 1 < seg.size() ? seg[i + 1].start : market.horizon());
    if (b <= a) break;
    const Eigen::VectorXd sk = seg[i].sigma.transpose() * k;
    s.var += (b - a) * sk.squaredNorm();
    s.cross += (b - a) * sk.dot(seg[i].sigma.transpose() * pi);
    s.ret += (b - a) * k.dot(seg[i].mu);
  }
  return s;
}

}  // namespace

PerturbationReport perturbation_test(const Utility& u, const GdaParams& params,
                                     const MarketModel& market, const StrategyPath& path,
                                     const PerturbationSpec& pert, double tol) {
  const std::size_t i = node_index(path, pert.t);
  const double t = path.grid[i];
  if (pert.k.size() != market.d()) throw ParameterError("direction k has the wrong dimension");
  const double v = path.v[i];
  const double y = path.y[i];
  const GdaSurface surface(u, params);

  PerturbationReport rep;
  rep.t = t;
  rep.sqrt_scaling = params.delta == 1.0 && v == 0.0;
  rep.epsilons = pert.epsilons;
  if (rep.epsilons.empty() && rep.sqrt_scaling) {
    const double e = std::min(1e-2, 0.5 * (market.horizon() - t));
    rep.epsilons = {e, 1e-2 * e, 1e-4 * e};
  } else if (rep.epsilons.empty()) {
    // Keep the spike's change of v within 2% of v so higher orders stay small near T.
    const Eigen::MatrixXd st = market.sigma(t).transpose();
    const double rate = (st * pert.k).squaredNorm() + 2.0 * std::abs((st * pert.k).dot(st * path.pi[i]));
    double e = 4e-4;
    if (v > 0.0 && rate > 0.0) e = std::min(e, 0.02 * v / rate);
    rep.epsilons = {e, e / 2.0, e / 4.0};
  }
  const double max_eps = *std::max_element(rep.epsilons.begin(), rep.epsilons.end());
  if (!(t + max_eps < market.horizon())) throw DomainError("t + eps must stay below T");

  const double g0 = surface.g(v, y);
  auto limit = [&](const Eigen::VectorXd& k, std::vector<double>* quotients) {
    std::vector<double> h;
    std::vector<double> q;
    for (double eps : rep.epsilons) {
      const SpikeMoments s = spike(market, t, eps, k, path.pi[i]);
      const double dv = s.var + 2.0 * s.cross;
      const double delta = surface.g(v + dv, y + s.ret) - g0;
      const double scale = rep.sqrt_scaling ? std::sqrt(eps) : eps;
      h.push_back(scale);
      q.push_back(delta / scale);
    }
    if (quotients) *quotients = q;
    return extrapolate_to_zero(h, q);
  };

  rep.leading = limit(pert.k, &rep.quotients);
  if (rep.sqrt_scaling) {
    const Eigen::VectorXd sk = market.sigma(t).transpose() * pert.k;
    rep.expected = sk.norm() * c_star(params.beta).value;
    rep.first_order = rep.leading;
    rep.pass = std::abs(rep.leading - rep.expected) <= kDaTol && rep.leading < 0.0;
    return rep;
  }
  const double minus = limit(-pert.k, nullptr);
  rep.first_order = 0.5 * (rep.leading - minus);
  rep.second_order = 0.5 * (rep.leading + minus);
  rep.pass = rep.first_order <= tol;
  return rep;
}

std::vector<Eigen::VectorXd> direction_basket(const MarketModel& market, double t,
                                              std::uint64_t seed) {
  const int d = market.d();
  std::vector<Eigen::VectorXd> out;
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(d);
  e1(0) = 1.0;
  Eigen::VectorXd lam = market.lambda(t);
  lam = lam.norm() > 0.0 ? Eigen::VectorXd(lam / lam.norm()) : e1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> base{e1, lam};
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd z(d);
    do {
      for (int j = 0; j < d; ++j) z(j) = normal(rng);
    } while (z.norm() == 0.0);
    base.push_back(z / z.norm());
  }
  for (const auto& b : base) {
    out.push_back(b);
    out.push_back(-b);
  }
  return out;
}

std::vector<CertificationRow> certify(const Utility& u, const GdaParams& params,
                                      const MarketModel& market, const StrategyPath& path,
                                      const std::vector<double>& times, std::uint64_t seed,
                                      double tol) {
  std::vector<CertificationRow> rows;
  for (double t : times) {
    const auto basket = direction_basket(market, t, seed);
    for (std::size_t j = 0; j < basket.size(); ++j) {
      PerturbationSpec spec;
      spec.t = t;
      spec.k = basket[j];
      const auto rep = perturbation_test(u, params, market, path, spec, tol);
      rows.push_back({rep.t, static_cast<int>(j), rep.first_order, rep.pass});
    }
  }
  return rows;
}

StrategyPath scale_path(const StrategyPath& path, double factor) {
  StrategyPath out = path;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.a[i] *= factor;
    out.pi[i] *= factor;
    out.v[i] *= factor * factor;
    out.y[i] *= factor;
    out.m_val[i] *= factor;
  }
  return out;
}

}  // namespace gda
