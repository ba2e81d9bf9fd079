#include "gda_cli/run.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "gda/crra.hpp"
#include "gda/errors.hpp"
#include "gda/io.hpp"
#include "gda/numerics.hpp"
#include "gda/surface.hpp"
#include "gda/verification.hpp"

#ifndef GDA_VERSION
#define GDA_VERSION "unknown"
#endif

namespace gda::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* guess_name(InitialGuess g) {
  switch (g) {
    case InitialGuess::boundary: return "boundary";
    case InitialGuess::zero: return "zero";
    case InitialGuess::upper: return "upper";
  }
  return "unknown";
}

json config_json(const ExperimentConfig& cfg) {
  json j;
  j["mode"] = to_string(cfg.mode);
  j["preset"] = cfg.preset;
  j["output_path"] = cfg.output_path.string();
  j["seed"] = cfg.seed;
  j["market"] = {{"T", cfg.market.horizon},
                 {"breakpoints", cfg.market.breakpoints},
                 {"mu", cfg.market.mu},
                 {"sigma", cfg.market.sigma}};
  j["utility"] = {{"kind", cfg.utility.kind}, {"rho", cfg.utility.rho}};
  if (cfg.utility.kind == "mix") j["utility"]["rho2"] = cfg.utility.rho2;
  j["gda"] = {{"beta", cfg.gda.beta}, {"delta", cfg.gda.delta}};
  j["solver"] = {{"grid_step", cfg.solver.grid_step},
                 {"picard_tol", cfg.solver.picard_tol},
                 {"max_picard_iters", cfg.solver.max_picard_iters},
                 {"window_shrink", cfg.solver.window_shrink},
                 {"max_shrinks", cfg.solver.max_shrinks},
                 {"initial_guess", guess_name(cfg.solver.initial_guess)},
                 {"memoize", cfg.solver.memoize}};
  if (cfg.mode == Mode::hdra || cfg.mode == Mode::figures) j["hdra"] = {{"alpha", cfg.hdra_alpha}};
  if (cfg.mode == Mode::surface || cfg.mode == Mode::figures)
    j["surface"] = {{"v_max", cfg.surface.v_max},
                    {"v_points", cfg.surface.v_points},
                    {"y0", cfg.surface.y0}};
  if (cfg.mode == Mode::verify)
    j["verify"] = {{"tol", cfg.verify.tol},
                   {"times", cfg.verify_times()},
                   {"input", cfg.verify.input.string()},
                   {"mc_paths", cfg.verify.mc_paths}};
  return j;
}

json tolerances_json(const ExperimentConfig& cfg) {
  return {{"picard_tol", cfg.solver.picard_tol},
          {"gda_value_root_tol", kDefaultRootTol},
          {"surface_root_tol", 1e-14},
          {"integrate_tol", 1e-9},
          {"gauss_hermite_order", numerics::default_gauss_hermite().order()},
          {"first_order_tol", cfg.verify.tol},
          {"da_limit_tol", kDaTol},
          {"near_da_warning", 1e-6}};
}

json versions_json() {
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream boost;
  boost << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
  std::ostringstream nl;
  nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
     << NLOHMANN_JSON_VERSION_PATCH;
  return {{"gda", GDA_VERSION}, {"eigen", eigen.str()}, {"boost", boost.str()}, {"nlohmann_json", nl.str()}};
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct Context {
  Context(const ExperimentConfig& c, std::ostream& l) : cfg(c), log(l) {}

  const ExperimentConfig& cfg;
  std::ostream& log;
  json results = json::object();
  json artifacts = json::array();
  std::vector<fs::path> files;

  void write(const std::string& name, const CsvTable& table, json info = json::object()) {
    const fs::path path = cfg.output_path / name;
    emit_csv(path, table);
    files.push_back(path);
    info["file"] = name;
    info["rows"] = table.rows.size();
    artifacts.push_back(std::move(info));
    log << "wrote " << path.string() << '\n';
  }
};

double max_residual(const StrategyPath& path) {
  double r = 0.0;
  for (double x : path.residual) r = std::max(r, x);
  return r;
}

std::vector<double> v_grid(const SurfaceConfig& s) {
  std::vector<double> v(static_cast<std::size_t>(s.v_points));
  for (int i = 0; i < s.v_points; ++i) v[i] = s.v_max * i / (s.v_points - 1);
  return v;
}

CsvTable surface_points_table(const GdaSurface& surface, const std::vector<double>& vs, double y) {
  CsvTable table;
  table.header = {"v", "y", "g", "H", "H_x", "H_y", "g_v", "g_y", "m", "mrs"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double v : vs) {
    std::vector<double> row;
    try {
      const SurfacePoint p = surface.evaluate(std::sqrt(v), y);
      row = {v, y, p.g, p.H, p.H_x, p.H_y, p.g_v, p.g_y, p.m, 0.5 / p.m};
    } catch (const BoundaryError&) {
      // delta = 1 at v = 0: g is defined, its derivatives are not.
      const double H = surface.solve_H(0.0, y);
      row = {v, y, surface.g(v, y), H, nan, nan, nan, nan, nan, nan};
    }
    std::vector<std::string> cells;
    for (double c : row) cells.push_back(format_number(c));
    table.add_row(std::move(cells));
  }
  return table;
}

int run_surface(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GdaSurface surface(cfg.utility.build(), cfg.gda);
  const auto vs = v_grid(cfg.surface);
  ctx.write("indifference.csv", indifference_table(indifference_curve(surface, vs, cfg.surface.y0)),
            {{"series", "indifference curve through (0, y0)"}});
  ctx.write("surface.csv", surface_points_table(surface, vs, cfg.surface.y0),
            {{"series", "surface values and partials along y = y0"}});
  return exit_status::ok;
}

StrategyPath solve_configured(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Utility u = cfg.utility.build();
  const MarketModel market = cfg.market.build();
  auto warn = [&](const std::string& w) {
    ctx.log << "warning: " << w << '\n';
    ctx.results["warnings"].push_back(w);
  };
  return solve(u, cfg.gda, market, cfg.solver, warn);
}

void record_path(Context& ctx, const StrategyPath& path) {
  ctx.results["nodes"] = path.size();
  ctx.results["max_fixed_point_residual"] = max_residual(path);
  if (path.size() > 0) {
    ctx.results["pi_at_0"] = std::vector<double>(path.pi.front().data(), path.pi.front().data() + path.d());
    ctx.results["pi_at_last_node"] =
        std::vector<double>(path.pi.back().data(), path.pi.back().data() + path.d());
  }
}

int run_equilibrium(Context& ctx) {
  const StrategyPath path = solve_configured(ctx);
  record_path(ctx, path);
  ctx.write("strategy.csv", strategy_path_table(path),
            {{"solver", ctx.cfg.gda.delta == 1.0 ? "non-participation" : "general"}});
  return exit_status::ok;
}

CrraSpec crra_spec(const ExperimentConfig& cfg, double beta, double delta) {
  CrraSpec spec{cfg.utility.rho, beta, delta};
  spec.validate();
  return spec;
}

int run_crra(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const MarketModel market = cfg.market.build();
  const StrategyPath path = equilibrium_crra(crra_spec(cfg, cfg.gda.beta, cfg.gda.delta), market,
                                             make_time_grid(market, cfg.solver.grid_step));
  record_path(ctx, path);
  ctx.write("strategy.csv", strategy_path_table(path), {{"solver", "crra"}});
  return exit_status::ok;
}

int run_hdra(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const MarketModel market = cfg.market.build();
  const StrategyPath path =
      equilibrium_hdra(crra_spec(cfg, cfg.gda.beta, cfg.gda.delta),
                       HdraSpec::affine(cfg.utility.rho, cfg.hdra_alpha), market, cfg.solver);
  record_path(ctx, path);
  ctx.write("strategy.csv", strategy_path_table(path),
            {{"solver", "hdra"}, {"rho0", cfg.utility.rho}, {"alpha", cfg.hdra_alpha}});
  return exit_status::ok;
}

int run_verify(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Utility u = cfg.utility.build();
  const MarketModel market = cfg.market.build();
  const StrategyPath path =
      cfg.verify.input.empty() ? solve_configured(ctx) : read_strategy_path_csv(cfg.verify.input);
  if (path.d() != market.d()) throw ConfigError("input path dimension does not match the market");

  std::vector<double> times = cfg.verify_times();
  if (cfg.verify.times.empty() && path.size() > 0) {
    // Default times snap to the nearest node of the path.
    for (double& t : times) {
      auto it = std::min_element(path.grid.begin(), path.grid.end(),
                                 [t](double a, double b) { return std::abs(a - t) < std::abs(b - t); });
      t = *it;
    }
  }
  ctx.results["certified_times"] = times;
  const auto rows = certify(u, cfg.gda, market, path, times, cfg.seed, cfg.verify.tol);
  bool pass = std::all_of(rows.begin(), rows.end(), [](const CertificationRow& r) { return r.pass; });
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) worst = std::max(worst, r.first_order_coeff);
  ctx.results["certification_pass"] = pass;
  ctx.results["worst_first_order_coeff"] = worst;
  ctx.write("certification.csv", certification_table(rows),
            {{"input", cfg.verify.input.empty() ? "solved" : cfg.verify.input.string()}});

  if (cfg.verify.mc_paths > 0 && path.size() > 0) {
    McConfig mc;
    mc.n_paths = cfg.verify.mc_paths;
    mc.seed = cfg.seed;
    const LogNormal dist = LogNormal::from_vy(path.v.front(), path.y.front());
    const double quad = gda_value(u, cfg.gda, dist);
    const McEstimate est = mc_gda_value(u, cfg.gda, dist, mc);
    const bool ok = std::abs(quad - est.estimate) <= 4.0 * est.std_err || quad == est.estimate;
    CsvTable table;
    table.header = {"t", "v", "y", "quadrature", "monte_carlo", "std_err", "pass"};
    table.add_row({format_number(path.grid.front()), format_number(path.v.front()),
                   format_number(path.y.front()), format_number(quad), format_number(est.estimate),
                   format_number(est.std_err), ok ? "true" : "false"});
    ctx.results["mc_oracle_pass"] = ok;
    ctx.write("mc_oracle.csv", table, {{"paths", mc.n_paths}});
    pass = pass && ok;
  }

  ctx.log << (pass ? "verification passed" : "verification FAILED") << '\n';
  return pass ? exit_status::ok : exit_status::verification_failed;
}

int run_figures(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Preset& preset = find_preset(cfg.preset);
  const MarketConfig reference;
  const MarketModel market = reference.build();
  const double rho = 1.0;
  const auto grid = make_time_grid(market, cfg.solver.grid_step);
  ctx.results["preset"] = {{"name", preset.name},
                           {"description", preset.description},
                           {"mu", 0.06},
                           {"sigma", 0.3},
                           {"T", market.horizon()},
                           {"rho", rho}};
  for (const auto& s : preset.series) {
    const std::string file = preset.name + "_" + s.label + ".csv";
    json info{{"beta", s.beta}, {"delta", s.delta}};
    switch (preset.kind) {
      case PresetKind::indifference: {
        const GdaSurface surface(Utility::crra(rho), {s.beta, s.delta});
        ctx.write(file, indifference_table(indifference_curve(surface, v_grid(cfg.surface), 0.0)), info);
        break;
      }
      case PresetKind::strategy: {
        const StrategyPath path = equilibrium_crra({rho, s.beta, s.delta}, market, grid);
        ctx.write(file, strategy_path_table(path), info);
        break;
      }
      case PresetKind::hdra: {
        const StrategyPath path = equilibrium_hdra({rho, s.beta, s.delta},
                                                   HdraSpec::affine(rho, s.alpha), market, cfg.solver);
        info["alpha"] = s.alpha;
        ctx.write(file, strategy_path_table(path), info);
        break;
      }
    }
  }
  return exit_status::ok;
}

int dispatch(Context& ctx) {
  switch (ctx.cfg.mode) {
    case Mode::surface: return run_surface(ctx);
    case Mode::equilibrium: return run_equilibrium(ctx);
    case Mode::crra: return run_crra(ctx);
    case Mode::hdra: return run_hdra(ctx);
    case Mode::verify: return run_verify(ctx);
    case Mode::figures: return run_figures(ctx);
  }
  throw ConfigError("unknown mode");
}

int classify(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::domain:
    case ErrorKind::parameter:
    case ErrorKind::model: return exit_status::config;
    case ErrorKind::io: return exit_status::io;
    default: return exit_status::solver;
  }
}

const char* category(int code) {
  switch (code) {
    case exit_status::ok: return "ok";
    case exit_status::verification_failed: return "verification failure";
    case exit_status::config: return "configuration error";
    case exit_status::solver: return "solver error";
    case exit_status::io: return "I/O error";
  }
  return "error";
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table{
      {"fig1", "indifference curves and MRS, GDA (beta 0.5, delta 1.1 and 0.9) and EU",
       PresetKind::indifference,
       {{"beta0.5_delta1.1", 0.5, 1.1}, {"beta0.5_delta0.9", 0.5, 0.9}, {"eu", 0.0, 0.9}}},
      {"fig2", "indifference curves and MRS, DA (beta 0.5, delta 1) and EU", PresetKind::indifference,
       {{"beta0.5_delta1", 0.5, 1.0}, {"eu", 0.0, 0.9}}},
      {"fig3a", "equilibrium strategies, beta 0.5, delta in {0.7, 0.8, 0.9}", PresetKind::strategy,
       {{"delta0.7", 0.5, 0.7}, {"delta0.8", 0.5, 0.8}, {"delta0.9", 0.5, 0.9}}},
      {"fig3b", "equilibrium strategies, beta 0.5, delta in {1.1, 1.2, 1.3}", PresetKind::strategy,
       {{"delta1.1", 0.5, 1.1}, {"delta1.2", 0.5, 1.2}, {"delta1.3", 0.5, 1.3}}},
      {"fig4a", "equilibrium strategies, delta 0.9, beta in {0.5, 0.6, 0.7}", PresetKind::strategy,
       {{"beta0.5", 0.5, 0.9}, {"beta0.6", 0.6, 0.9}, {"beta0.7", 0.7, 0.9}}},
      {"fig4b", "equilibrium strategies, delta 1.1, beta in {0.5, 0.6, 0.7}", PresetKind::strategy,
       {{"beta0.5", 0.5, 1.1}, {"beta0.6", 0.6, 1.1}, {"beta0.7", 0.7, 1.1}}},
      {"fig5a", "HDRA rho(t) = 1 + 0.5 t, delta 0.9, beta in {0, 0.5}", PresetKind::hdra,
       {{"beta0", 0.0, 0.9, 0.5}, {"beta0.5", 0.5, 0.9, 0.5}}},
      {"fig5b", "HDRA rho(t) = 1 + 2 t, delta 0.9, beta in {0, 0.5}", PresetKind::hdra,
       {{"beta0", 0.0, 0.9, 2.0}, {"beta0.5", 0.5, 0.9, 2.0}}},
  };
  return table;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
}

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  RunResult result;
  Context ctx(cfg, log);

  try {
    cfg.validate();
    if (cfg.mode == Mode::figures) (void)find_preset(cfg.preset);
    result.exit_code = dispatch(ctx);
  } catch (const ConfigError& e) {
    result.exit_code = exit_status::config;
    result.message = e.what();
  } catch (const Error& e) {
    result.exit_code = classify(e);
    result.message = std::string(to_string(e.kind())) + ": " + e.what();
  } catch (const fs::filesystem_error& e) {
    result.exit_code = exit_status::io;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = exit_status::solver;
    result.message = e.what();
  }
  if (result.exit_code == exit_status::verification_failed && result.message.empty())
    result.message = "perturbation certification failed";
  result.artifacts = ctx.files;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["version"] = versions_json();
  manifest["started_at"] = started_at;
  manifest["wall_time_seconds"] = wall;
  manifest["config"] = config_json(cfg);
  manifest["tolerances"] = tolerances_json(cfg);
  manifest["results"] = ctx.results;
  manifest["artifacts"] = ctx.artifacts;
  manifest["status"] = {{"exit_code", result.exit_code},
                        {"category", category(result.exit_code)},
                        {"message", result.message}};
  try {
    fs::create_directories(cfg.output_path);
    const fs::path path = cfg.output_path / "manifest.json";
    std::ofstream os(path, std::ios::binary);
    os << manifest.dump(2) << '\n';
    os.close();
    if (!os) throw IoError("cannot write " + path.string());
    result.manifest = path;
  } catch (const std::exception& e) {
    if (result.exit_code == exit_status::ok) {
      result.exit_code = exit_status::io;
      result.message = e.what();
    }
  }

  if (result.exit_code != exit_status::ok)
    log << "error (" << category(result.exit_code) << "): " << result.message << '\n';
  return result;
}

}  // namespace gda::cli
