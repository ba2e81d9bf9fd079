#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "gda_cli/config.hpp"
#include "gda_cli/run.hpp"

namespace {

using gda::cli::ConfigError;
using gda::cli::ExperimentConfig;

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::optional<std::string> input;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> grid_step;
  std::optional<double> beta;
  std::optional<double> delta;
  std::optional<double> rho;
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<double> horizon;
  std::optional<double> alpha;
  std::optional<std::size_t> mc_paths;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "INI configuration file")->envname("GDA_CONFIG");
  app.add_option("--out", f.out, "output directory")->envname("GDA_OUT");
  app.add_option("--preset", f.preset, "figure preset (fig1 .. fig5b)")->envname("GDA_PRESET");
  app.add_option("--input", f.input, "strategy path CSV to verify")->envname("GDA_INPUT");
  app.add_option("--seed", f.seed, "random seed")->envname("GDA_SEED");
  app.add_option("--tol", f.tol, "Picard tolerance")->envname("GDA_TOL");
  app.add_option("--grid-step", f.grid_step, "time grid spacing")->envname("GDA_GRID_STEP");
  app.add_option("--beta", f.beta, "disappointment weight")->envname("GDA_BETA");
  app.add_option("--delta", f.delta, "threshold adjustment")->envname("GDA_DELTA");
  app.add_option("--rho", f.rho, "relative risk aversion (rho(0) in hdra mode)")->envname("GDA_RHO");
  app.add_option("--mu", f.mu, "constant drift, one asset")->envname("GDA_MU");
  app.add_option("--sigma", f.sigma, "constant volatility, one asset")->envname("GDA_SIGMA");
  app.add_option("--horizon,-T", f.horizon, "horizon in years")->envname("GDA_T");
  app.add_option("--alpha", f.alpha, "HDRA slope, rho(t) = rho + alpha t")->envname("GDA_ALPHA");
  app.add_option("--mc-paths", f.mc_paths, "Monte-Carlo paths for the verify value check (0 = off)")
      ->envname("GDA_MC_PATHS");
}

ExperimentConfig build_config(const Flags& f, gda::cli::Mode mode) {
  ExperimentConfig cfg;
  if (f.config) gda::cli::apply_ini(cfg, std::filesystem::path(*f.config));
  cfg.mode = mode;
  if (f.out) cfg.output_path = *f.out;
  if (f.preset) cfg.preset = *f.preset;
  if (f.input) cfg.verify.input = *f.input;
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol) cfg.solver.picard_tol = *f.tol;
  if (f.grid_step) cfg.solver.grid_step = *f.grid_step;
  if (f.beta) cfg.gda.beta = *f.beta;
  if (f.delta) cfg.gda.delta = *f.delta;
  if (f.rho) cfg.utility.rho = *f.rho;
  if (f.alpha) cfg.hdra_alpha = *f.alpha;
  if (f.mc_paths) cfg.verify.mc_paths = *f.mc_paths;
  if (f.horizon) cfg.market.horizon = *f.horizon;
  if (f.mu || f.sigma) {
    if (cfg.market.mu.size() != 1 || cfg.market.mu.front().size() != 1)
      throw ConfigError("--mu/--sigma apply to a single-asset constant market only");
    if (f.mu) cfg.market.mu = {{*f.mu}};
    if (f.sigma) cfg.market.sigma = {{*f.sigma}};
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized disappointment aversion: certainty equivalents and equilibrium "
               "portfolio strategies",
               "gda"};
  app.require_subcommand(1);
  Flags flags;
  add_flags(app, flags);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"surface", "GDA value surface, indifference curve and MRS"},
      {"equilibrium", "equilibrium strategy by backward Picard iteration"},
      {"crra", "semi-analytic equilibrium for CRRA utility"},
      {"hdra", "equilibrium with horizon-dependent risk aversion"},
      {"verify", "spike-perturbation certification of a strategy path"},
      {"figures", "reproduce a figure preset as CSV"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gda::cli::exit_status::config;
  }

  try {
    const auto mode = gda::cli::parse_mode(app.get_subcommands().front()->get_name());
    const ExperimentConfig cfg = build_config(flags, mode);
    const auto result = gda::cli::run(cfg, std::cerr);
    if (!result.manifest.empty()) std::cerr << "manifest " << result.manifest.string() << '\n';
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error (configuration error): " << e.what() << '\n';
    return gda::cli::exit_status::config;
  }
}
