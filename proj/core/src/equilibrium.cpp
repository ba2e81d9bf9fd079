#include "gda/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "gda/errors.hpp"
#include "gda/surface.hpp"

namespace gda {

void SolverConfig::validate() const {
  if (!(grid_step > 0.0) || !std::isfinite(grid_step))
    throw ParameterError("grid_step must be positive");
  if (!(picard_tol > 0.0)) throw ParameterError("picard_tol must be positive");
  if (max_picard_iters < 1) throw ParameterError("max_picard_iters must be >= 1");
  if (!(window_shrink > 0.0 && window_shrink < 1.0))
    throw ParameterError("window_shrink must lie in (0, 1)");
  if (max_shrinks < 0) throw ParameterError("max_shrinks must be >= 0");
}

namespace {

// Quadrature weights for the integral over [t_j, t_{j+1}] of a function known at the
// nodes: exact integral of the cubic through t_j..t_{j+3} (shifted left near T).
// The stencil never reaches before t_j, so tail sums only use already-known nodes.
struct IntervalRule {
  std::size_t first;
  int count;
  double w[4];
};

std::vector<IntervalRule> interval_rules(const std::vector<double>& t) {
  const std::size_t N = t.size() - 1;
  std::vector<IntervalRule> rules(N);
  const int count = N >= 3 ? 4 : 2;
  for (std::size_t j = 0; j < N; ++j) {
    IntervalRule& r = rules[j];
    r.count = count;
    r.first = count == 2 ? j : std::min(j, N - 3);
    const double a = t[j];
    const double b = t[j + 1];
    // Two-point Gauss–Legendre is exact for cubics.
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double off = half / std::sqrt(3.0);
    for (int k = 0; k < count; ++k) {
      double w = 0.0;
      for (double x : {mid - off, mid + off}) {
        double l = 1.0;
        for (int q = 0; q < count; ++q)
          if (q != k) l *= (x - t[r.first + q]) / (t[r.first + k] - t[r.first + q]);
        w += half * l;
      }
      r.w[k] = w;
    }
  }
  return rules;
}

void tail_sums(const PicardProblem& p, const std::vector<IntervalRule>& rules,
               const std::vector<double>& m, std::size_t s, std::size_t e, std::vector<double>& V,
               std::vector<double>& Y) {
  for (std::size_t j = e; j-- > s;) {
    const IntervalRule& r = rules[j];
    double iv = 0.0;
    double iy = 0.0;
    for (int k = 0; k < r.count; ++k) {
      const double mk = m[r.first + k];
      iv += r.w[k] * mk * mk;
      iy += r.w[k] * mk;
    }
    V[j] = V[j + 1] + iv * p.ell[j];
    Y[j] = Y[j + 1] + iy * p.ell[j];
  }
}

// V integrates a nonnegative function; the interpolatory weights can undershoot zero
// on a rough intermediate iterate.
double root_of(double V) { return std::sqrt(std::max(V, 0.0)); }

double initial_value(const PicardProblem& p, const SolverConfig& cfg, double continuation) {
  switch (cfg.initial_guess) {
    case InitialGuess::zero:
      return 0.0;
    case InitialGuess::upper:
      return p.m_upper;
    case InitialGuess::boundary:
      break;
  }
  return continuation;
}

}  // namespace

PicardSolution solve_picard(const PicardProblem& p, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t N = p.t.size() - 1;
  if (p.t.size() < 2 || p.ell.size() != N) throw ParameterError("Picard grid is inconsistent");

  const auto rules = interval_rules(p.t);
  PicardSolution sol;
  sol.m.assign(N + 1, 0.0);
  sol.V.assign(N + 1, 0.0);
  sol.Y.assign(N + 1, 0.0);
  sol.m[N] = p.m_terminal;

  const double T = p.t.back() - p.t.front();
  double lam2 = 0.0;
  for (double l : p.ell) lam2 = std::max(lam2, l);
  const double lam = std::sqrt(lam2);
  double eps = std::min(1.0, T);
  if (lam > 0.0 && p.lipschitz > 0.0) {
    const double bound = 1.0 / (4.0 * p.lipschitz * p.lipschitz * lam2 * (1.0 + lam) * (1.0 + lam));
    eps = std::min(eps, bound);
  }

  std::size_t e = N;
  while (e > 0) {
    std::size_t s = e - 1;
    while (s > 0 && p.t[e] - p.t[s - 1] <= eps * (1.0 + 1e-12)) --s;

    const double start = initial_value(p, cfg, sol.m[e]);
    for (std::size_t i = s; i < e; ++i) sol.m[i] = start;

    bool converged = false;
    bool contracting = false;
    int growth = 0;
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> next(e - s);
    for (int it = 0; it < cfg.max_picard_iters; ++it) {
      tail_sums(p, rules, sol.m, s, e, sol.V, sol.Y);
      double diff = 0.0;
      for (std::size_t i = s; i < e; ++i) {
        next[i - s] = p.mfn(i, root_of(sol.V[i]), sol.Y[i]);
        diff = std::max(diff, std::abs(next[i - s] - sol.m[i]) * std::sqrt(p.ell[i]));
      }
      for (std::size_t i = s; i < e; ++i) sol.m[i] = next[i - s];
      ++sol.iterations;
      if (!std::isfinite(diff)) {
        growth = 3;
        break;
      }
      if (diff <= cfg.picard_tol) {
        converged = true;
        break;
      }
      if (it >= 1) {
        if (diff < prev)
          contracting = true;
        else
          ++growth;
      }
      if (growth >= 3) break;
      prev = diff;
    }

    if (converged) {
      tail_sums(p, rules, sol.m, s, e, sol.V, sol.Y);
      ++sol.windows;
      e = s;
      continue;
    }
    if (growth < 3 && contracting) {
      std::ostringstream os;
      os << "Picard iteration cap (" << cfg.max_picard_iters << ") reached on window ["
         << p.t[s] << ", " << p.t[e] << "]";
      throw ConvergenceError(os.str());
    }
    if (++sol.shrinks > cfg.max_shrinks || e - s == 1) {
      std::ostringstream os;
      os << "no contractive window found near t=" << p.t[e] << " after " << sol.shrinks - 1
         << " shrinks";
      throw StepSizeError(os.str());
    }
    eps *= cfg.window_shrink;
  }

  tail_sums(p, rules, sol.m, 0, N, sol.V, sol.Y);
  sol.residual.assign(N + 1, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    sol.residual[i] = std::abs(sol.m[i] - p.mfn(i, root_of(sol.V[i]), sol.Y[i]));
  return sol;
}

double sample_lipschitz(const std::function<double(double, double)>& m, double xmax, double ymin,
                        double ymax) {
  constexpr int n = 5;
  double vals[n][n];
  const double dx = xmax / (n - 1);
  const double dy = (ymax - ymin) / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) vals[i][j] = m(i * dx, ymin + j * dy);
  double L = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i + 1 < n && dx > 0.0) L = std::max(L, std::abs(vals[i + 1][j] - vals[i][j]) / dx);
      if (j + 1 < n && dy > 0.0) L = std::max(L, std::abs(vals[i][j + 1] - vals[i][j]) / dy);
    }
  }
  return L;
}

SolverGrid make_solver_grid(const MarketModel& market, double step, double tail, int tail_nodes) {
  const std::vector<double> base = make_time_grid(market, step);
  const double T = market.horizon();
  std::vector<std::pair<double, bool>> nodes;
  for (std::size_t i = 0; i + 1 < base.size(); ++i) nodes.emplace_back(base[i], true);
  nodes.emplace_back(T, false);
  const double len = std::min(tail, T);
  if (len > 0.0 && tail_nodes > 1) {
    const double s_max = std::sqrt(len);
    for (int k = 1; k < tail_nodes; ++k) {
      const double s = s_max * k / tail_nodes;
      nodes.emplace_back(T - s * s, false);
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && a.second && !b.second);
  });
  SolverGrid g;
  for (const auto& [t, rep] : nodes) {
    // Drop extra nodes that nearly coincide with a kept one.
    if (!g.t.empty() && t - g.t.back() < 1e-9 * std::max(1.0, T)) {
      if (rep) g.reported.back() = true;
      continue;
    }
    g.t.push_back(t);
    g.reported.push_back(rep);
  }
  g.t.back() = T;
  g.reported.back() = false;
  return g;
}

StrategyPath path_from_solution(const MarketModel& market, const SolverGrid& grid,
                                const PicardSolution& sol) {
  StrategyPath path;
  const auto& t = grid.t;
  const std::size_t N = t.size() - 1;
  for (std::size_t i = 0; i < N; ++i) {
    if (!grid.reported[i]) continue;
    const Eigen::VectorXd& lam = market.lambda(t[i]);
    const Eigen::VectorXd a = sol.m[i] * lam;
    path.grid.push_back(t[i]);
    path.a.push_back(a);
    path.pi.push_back(market.sigma(t[i]).transpose().partialPivLu().solve(a));
    path.v.push_back(sol.V[i]);
    path.y.push_back(sol.Y[i]);
    path.m_val.push_back(sol.m[i]);
    path.residual.push_back(sol.residual.empty() ? 0.0 : sol.residual[i] * lam.norm());
  }
  return path;
}

namespace {

struct Key {
  long long x;
  long long y;
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    return std::hash<long long>()(k.x) * 1000003u ^ std::hash<long long>()(k.y);
  }
};

// m(x, y) with a per-solve cache keyed by (x, y) rounded to 1e-12.
class MemoM {
 public:
  MemoM(const GdaSurface& surface, bool enabled) : s_(surface), enabled_(enabled) {}

  double operator()(double x, double y) {
    const double yy = s_.utility().is_crra() ? 0.0 : y;
    if (!enabled_) return s_.m(x, yy);
    const Key k{std::llround(x * 1e12), std::llround(yy * 1e12)};
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const double v = s_.m(x, yy);
    cache_.emplace(k, v);
    return v;
  }

 private:
  const GdaSurface& s_;
  bool enabled_;
  std::unordered_map<Key, double, KeyHash> cache_;
};

}  // namespace

StrategyPath solve_equilibrium(const Utility& u, const GdaParams& params,
                               const MarketModel& market, const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  if (params.delta == 1.0)
    throw ParameterError("delta = 1 has the non-participation equilibrium; use solve_equilibrium_da");
  const double c0 = u.c0_estimate();
  if (!std::isfinite(c0))
    throw ParameterError("utility violates the risk-aversion lower bound (m is unbounded)");

  const GdaSurface surface(u, params);
  MemoM memo(surface, cfg.memoize);

  const SolverGrid grid = make_solver_grid(market, cfg.grid_step);
  PicardProblem prob;
  prob.t = grid.t;
  const std::size_t N = prob.t.size() - 1;
  for (std::size_t j = 0; j < N; ++j) prob.ell.push_back(market.lambda(prob.t[j]).squaredNorm());
  prob.m_terminal = surface.m(0.0, 0.0);
  prob.m_upper = c0;
  const double lam = market.lambda_sup();
  const double T = market.horizon();
  prob.lipschitz = sample_lipschitz([&](double x, double y) { return memo(x, y); },
                                    c0 * lam * std::sqrt(T), -c0 * lam * lam * T,
                                    c0 * lam * lam * T);
  prob.mfn = [&memo](std::size_t, double x, double y) { return memo(x, y); };
  return path_from_solution(market, grid, solve_picard(prob, cfg));
}

StrategyPath solve_equilibrium_da(const Utility&, const GdaParams& params,
                                  const MarketModel& market, double grid_step) {
  params.validate();
  if (params.delta != 1.0) throw ParameterError("solve_equilibrium_da requires delta = 1");
  const auto t = make_time_grid(market, grid_step);
  StrategyPath path;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(market.d());
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    path.grid.push_back(t[i]);
    path.a.push_back(zero);
    path.pi.push_back(zero);
    path.v.push_back(0.0);
    path.y.push_back(0.0);
    path.m_val.push_back(0.0);
    path.residual.push_back(0.0);
  }
  return path;
}

StrategyPath solve(const Utility& u, const GdaParams& params, const MarketModel& market,
                   const SolverConfig& cfg, const std::function<void(const std::string&)>& warn) {
  if (params.delta == 1.0) return solve_equilibrium_da(u, params, market, cfg.grid_step);
  if (warn && std::abs(params.delta - 1.0) < 1e-6) {
    std::ostringstream os;
    os << "delta = " << params.delta
       << " is within 1e-6 of 1; the general solver is ill-conditioned here";
    warn(os.str());
  }
  return solve_equilibrium(u, params, market, cfg);
}

std::vector<NodeResidual> equilibrium_residual(const Utility& u, const GdaParams& params,
                                               const MarketModel& market,
                                               const StrategyPath& path) {
  const GdaSurface surface(u, params);
  std::vector<NodeResidual> out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    NodeResidual r;
    if (params.delta == 1.0 && path.v[i] == 0.0) {
      out.push_back(r);
      continue;
    }
    const double t = path.grid[i];
    const GPartials gp = surface.g_partials(path.v[i], path.y[i]);
    const Eigen::VectorXd vec =
        2.0 * market.sigma(t).transpose() * path.pi[i] * gp.g_v + market.lambda(t) * gp.g_y;
    r.value = vec.norm() / (std::abs(gp.g_v) + std::abs(gp.g_y));
    r.g_v_nonpositive = gp.g_v <= 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace gda
