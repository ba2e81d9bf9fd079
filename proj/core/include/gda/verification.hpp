#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gda/equilibrium.hpp"
#include "gda/market.hpp"
#include "gda/preference.hpp"

namespace gda {

struct McConfig {
  std::size_t n_paths = 1'000'000;
  int n_steps = 1;
  std::uint64_t seed = 20240607;

  void validate() const;
};

struct McEstimate {
  double estimate;
  double std_err;
};

/// Fixed point of the sample analogue of the GDA value equation on n_paths draws.
/// The standard error comes from 20 batch means.
McEstimate mc_gda_value(const Utility& u, const GdaParams& params, const OutcomeDistribution& dist,
                        const McConfig& mc);

/// Samples of W_T / W_{t0} under the path's (piecewise-constant) portfolio, using the
/// exact log-normal increment on every step.
std::vector<double> simulate_wealth(const MarketModel& market, const StrategyPath& path, double t0,
                                    const McConfig& mc);

struct PerturbationSpec {
  double t = 0.0;
  Eigen::VectorXd k;
  std::vector<double> epsilons;  // empty: defaults for the scaling in use
};

/// Spike perturbation pi + k 1_[t, t+eps) evaluated through g. For a differentiable node the
/// quotient Delta/eps is extrapolated to eps = 0 for k and -k, giving the linear part
/// (first_order) and g_v |sigma' k|^2 (second_order). For delta = 1 at v = 0 the quotient
/// is Delta/sqrt(eps), extrapolated in sqrt(eps), and compared with |sigma' k| c*.
struct PerturbationReport {
  double t = 0.0;
  bool sqrt_scaling = false;
  std::vector<double> epsilons;
  std::vector<double> quotients;  // for +k
  double leading = 0.0;           // extrapolated limit for +k
  double first_order = 0.0;
  double second_order = 0.0;
  double expected = 0.0;          // |sigma' k| c* in the sqrt case
  bool pass = false;
};

inline constexpr double kFirstOrderTol = 1e-6;
inline constexpr double kDaTol = 1e-3;

PerturbationReport perturbation_test(const Utility& u, const GdaParams& params,
                                     const MarketModel& market, const StrategyPath& path,
                                     const PerturbationSpec& pert, double tol = kFirstOrderTol);

/// Neville extrapolation of samples (h_i, f_i) to h = 0.
double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& f);

/// Eight unit directions: +-e_1, +-lambda/|lambda|, and +- two seeded random unit vectors.
std::vector<Eigen::VectorXd> direction_basket(const MarketModel& market, double t,
                                              std::uint64_t seed);

struct CertificationRow {
  double t;
  int k_index;
  double first_order_coeff;
  bool pass;
};

/// Perturbation test at each time (snapped to the nearest path node) for every basket direction.
std::vector<CertificationRow> certify(const Utility& u, const GdaParams& params,
                                      const MarketModel& market, const StrategyPath& path,
                                      const std::vector<double>& times, std::uint64_t seed = 7,
                                      double tol = kFirstOrderTol);

/// Multiplies the exposure by `factor`, with v and y rescaled consistently.
StrategyPath scale_path(const StrategyPath& path, double factor);

}  // namespace gda
