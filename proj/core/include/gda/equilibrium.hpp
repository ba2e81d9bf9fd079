#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gda/market.hpp"
#include "gda/preference.hpp"

namespace gda {

/// Equilibrium strategy on the nodes of [0, T). a_t = m_t lambda(t), pi_t = sigma(t)^{-T} a_t.
struct StrategyPath {
  std::vector<double> grid;
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::VectorXd> pi;
  std::vector<double> v;         // integral of |a|^2 over [t, T]
  std::vector<double> y;         // integral of a' lambda over [t, T]
  std::vector<double> m_val;
  std::vector<double> residual;  // |a_t - m(sqrt v, y) lambda(t)| at each node

  std::size_t size() const { return grid.size(); }
  int d() const { return a.empty() ? 0 : static_cast<int>(a.front().size()); }
};

enum class InitialGuess { boundary, zero, upper };

struct SolverConfig {
  double grid_step = 0.01;
  double picard_tol = 1e-11;
  int max_picard_iters = 400;
  double window_shrink = 0.5;
  int max_shrinks = 12;
  InitialGuess initial_guess = InitialGuess::boundary;
  bool memoize = true;

  void validate() const;
};

/// Backward windowed Picard iteration for m_i = mfn(i, sqrt(V_i), Y_i), where
/// V_i = int_{t_i}^T m^2 |lambda|^2 and Y_i = int_{t_i}^T m |lambda|^2, integrated with
/// forward four-node interpolatory weights.
/// Index N (t = T) is pinned at m_terminal.
struct PicardProblem {
  std::vector<double> t;        // nodes t_0 = 0 < ... < t_N = T
  std::vector<double> ell;      // |lambda|^2 on [t_j, t_{j+1}), size N
  std::function<double(std::size_t, double, double)> mfn;
  double m_terminal = 1.0;
  double m_upper = 1.0;         // Assumption-1 bound, used for the upper initial guess
  double lipschitz = 1.0;       // empirical Lipschitz constant of m
};

struct PicardSolution {
  std::vector<double> m;
  std::vector<double> V;
  std::vector<double> Y;
  std::vector<double> residual;  // |m_i - mfn(i, sqrt V_i, Y_i)|
  int windows = 0;
  int shrinks = 0;
  int iterations = 0;
};

PicardSolution solve_picard(const PicardProblem& problem, const SolverConfig& cfg);

/// General utility, delta != 1.
StrategyPath solve_equilibrium(const Utility& u, const GdaParams& params,
                               const MarketModel& market, const SolverConfig& cfg = {});

/// delta == 1: non-participation, the zero path on the solver grid.
StrategyPath solve_equilibrium_da(const Utility& u, const GdaParams& params,
                                  const MarketModel& market, double grid_step = 0.01);

/// Dispatches on delta == 1 (exact comparison). Emits a warning through `warn` when
/// |delta - 1| < 1e-6, where the general solver is ill-conditioned.
StrategyPath solve(const Utility& u, const GdaParams& params, const MarketModel& market,
                   const SolverConfig& cfg = {},
                   const std::function<void(const std::string&)>& warn = {});

/// Per node: |2 sigma' pi g_v + lambda g_y| / (|g_v| + |g_y|), or nullopt where the
/// surface is not differentiable (delta = 1 at v = 0).
struct NodeResidual {
  std::optional<double> value;
  bool g_v_nonpositive = true;
};
std::vector<NodeResidual> equilibrium_residual(const Utility& u, const GdaParams& params,
                                               const MarketModel& market,
                                               const StrategyPath& path);

/// Solver nodes: the reporting grid plus nodes graded uniformly in sqrt(T - t) over the
/// last `tail` years, where m changes by O(1) within a boundary layer of width ~x^2.
struct SolverGrid {
  std::vector<double> t;
  std::vector<bool> reported;  // true for nodes of the reporting grid (t < T)
};
SolverGrid make_solver_grid(const MarketModel& market, double step, double tail = 0.25,
                            int tail_nodes = 200);

/// Assembles a StrategyPath from a Picard solution at the reported nodes.
StrategyPath path_from_solution(const MarketModel& market, const SolverGrid& grid,
                                const PicardSolution& sol);

/// Empirical Lipschitz constant of m on [0, xmax] x [ymin, ymax] sampled on a 5 x 5 grid.
double sample_lipschitz(const std::function<double(double, double)>& m, double xmax, double ymin,
                        double ymax);

}  // namespace gda
