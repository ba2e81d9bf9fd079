#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gda/equilibrium.hpp"
#include "gda/market.hpp"
#include "gda/preference.hpp"
#include "gda/verification.hpp"

namespace gda::cli {

enum class Mode { surface, equilibrium, crra, hdra, verify, figures };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& name);
const std::vector<std::string>& mode_names();

/// Invalid or inconsistent configuration (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise-constant market. Segment i starts at breakpoints[i]; mu[i] has d entries
/// and sigma[i] holds the d x d volatility matrix row by row.
struct MarketConfig {
  double horizon = 3.0;
  std::vector<double> breakpoints{0.0};
  std::vector<std::vector<double>> mu{{0.06}};
  std::vector<std::vector<double>> sigma{{0.3}};

  MarketModel build() const;
};

/// kind = "crra" uses rho; kind = "mix" is the two-power utility
/// U = U_rho + U_rho2 (relative risk aversion between rho and rho2).
struct UtilityConfig {
  std::string kind = "crra";
  double rho = 1.0;
  double rho2 = 3.0;

  Utility build() const;
};

struct SurfaceConfig {
  double v_max = 1.0;
  int v_points = 101;
  double y0 = 0.0;
};

struct VerifyConfig {
  double tol = kFirstOrderTol;
  std::vector<double> times;  // empty: 0, T/3, 2T/3 and T - grid_step
  std::filesystem::path input;  // empty: solve with the configured parameters first
  std::size_t mc_paths = 0;     // > 0 adds a Monte-Carlo check of the value at t = 0
};

struct ExperimentConfig {
  Mode mode = Mode::equilibrium;
  MarketConfig market;
  UtilityConfig utility;
  GdaParams gda{0.5, 0.9};
  SolverConfig solver;
  double hdra_alpha = 0.5;
  SurfaceConfig surface;
  VerifyConfig verify;
  std::string preset;
  std::filesystem::path output_path = "out";
  std::uint64_t seed = 7;

  /// Checks every component before dispatch; throws ConfigError.
  void validate() const;
  /// Times at which verify certifies the path.
  std::vector<double> verify_times() const;
};

/// Flat key = value file with [run], [market], [utility], [gda], [solver], [hdra],
/// [surface] and [verify] sections. Keys present in the file override `cfg`.
void apply_ini(ExperimentConfig& cfg, std::istream& in);
void apply_ini(ExperimentConfig& cfg, const std::filesystem::path& path);

std::vector<double> parse_list(const std::string& text);

}  // namespace gda::cli
