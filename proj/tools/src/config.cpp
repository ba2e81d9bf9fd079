#include "gda_cli/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gda/errors.hpp"

namespace gda::cli {

namespace {

namespace pt = boost::property_tree;

const std::vector<std::pair<Mode, std::string>>& mode_table() {
  static const std::vector<std::pair<Mode, std::string>> table{
      {Mode::surface, "surface"}, {Mode::equilibrium, "equilibrium"}, {Mode::crra, "crra"},
      {Mode::hdra, "hdra"},       {Mode::verify, "verify"},           {Mode::figures, "figures"}};
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
}

long long to_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (trim(text.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + text + "'");
}

// Segments are separated by '|', entries within a segment by ','.
std::vector<std::vector<double>> parse_segments(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> out;
  for (const auto& seg : split(text, '|')) {
    std::vector<double> row;
    for (const auto& item : split(seg, ',')) {
      if (item.empty()) throw ConfigError("'" + key + "': empty entry in '" + text + "'");
      row.push_back(to_double(key, item));
    }
    out.push_back(std::move(row));
  }
  return out;
}

InitialGuess parse_guess(const std::string& text) {
  if (text == "boundary") return InitialGuess::boundary;
  if (text == "zero") return InitialGuess::zero;
  if (text == "upper") return InitialGuess::upper;
  throw ConfigError("solver.initial_guess must be boundary, zero or upper, got '" + text + "'");
}

Utility mix_utility(double r1, double r2) {
  auto level = [](double r, double w) { return r == 1.0 ? std::log(w) : std::pow(w, 1.0 - r) / (1.0 - r); };
  Utility::CustomSpec spec;
  spec.u = [=](double w) { return level(r1, w) + level(r2, w); };
  spec.d1 = [=](double w) { return std::pow(w, -r1) + std::pow(w, -r2); };
  spec.d2 = [=](double w) { return -r1 * std::pow(w, -r1 - 1.0) - r2 * std::pow(w, -r2 - 1.0); };
  spec.d3 = [=](double w) {
    return r1 * (r1 + 1.0) * std::pow(w, -r1 - 2.0) + r2 * (r2 + 1.0) * std::pow(w, -r2 - 2.0);
  };
  spec.order = 3;
  spec.nu = std::max({r1, r2, 1.0}) + 2.0;
  std::ostringstream os;
  os << "mix(rho=" << r1 << ", rho2=" << r2 << ")";
  spec.description = os.str();
  return Utility::custom(std::move(spec));
}

}  // namespace

const char* to_string(Mode mode) {
  for (const auto& [m, name] : mode_table())
    if (m == mode) return name.c_str();
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (const auto& [m, n] : mode_table())
    if (n == name) return m;
  throw ConfigError("unknown mode '" + name + "'");
}

const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : mode_table()) out.push_back(entry.second);
    return out;
  }();
  return names;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_double("list", item));
  return out;
}

MarketModel MarketConfig::build() const {
  if (breakpoints.size() != mu.size() || breakpoints.size() != sigma.size())
    throw ConfigError("market: breakpoints, mu and sigma need the same number of segments");
  std::vector<MarketSegment> segs;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const int d = static_cast<int>(mu[i].size());
    if (d == 0) throw ConfigError("market: empty mu segment");
    if (static_cast<int>(sigma[i].size()) != d * d)
      throw ConfigError("market: sigma segment must have d*d entries (row-major)");
    MarketSegment s;
    s.start = breakpoints[i];
    s.mu = Eigen::Map<const Eigen::VectorXd>(mu[i].data(), d);
    s.sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        sigma[i].data(), d, d);
    segs.push_back(std::move(s));
  }
  try {
    return MarketModel(horizon, std::move(segs));
  } catch (const Error& e) {
    throw ConfigError(std::string("market: ") + e.what());
  }
}

Utility UtilityConfig::build() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("utility.rho must be positive");
  if (kind == "crra") return Utility::crra(rho);
  if (kind == "mix") {
    if (!(rho2 > 0.0) || !std::isfinite(rho2)) throw ConfigError("utility.rho2 must be positive");
    return mix_utility(rho, rho2);
  }
  throw ConfigError("utility.kind must be crra or mix, got '" + kind + "'");
}

std::vector<double> ExperimentConfig::verify_times() const {
  if (!verify.times.empty()) return verify.times;
  const double T = market.horizon;
  return {0.0, T / 3.0, 2.0 * T / 3.0, T - solver.grid_step};
}

void ExperimentConfig::validate() const {
  const MarketModel m = market.build();
  (void)utility.build();
  try {
    gda.validate();
    solver.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (solver.grid_step >= market.horizon) throw ConfigError("solver.grid_step must be below T");
  if (mode == Mode::crra || mode == Mode::hdra) {
    if (utility.kind != "crra")
      throw ConfigError(std::string(to_string(mode)) + " mode needs utility.kind = crra");
    if (gda.delta == 1.0)
      throw ConfigError(
          "delta = 1 is disappointment aversion, whose unique equilibrium is non-participation "
          "(pi = 0); run the equilibrium mode to get the zero path");
  }
  if (mode == Mode::hdra && !(hdra_alpha >= 0.0 && std::isfinite(hdra_alpha)))
    throw ConfigError("hdra.alpha must be >= 0");
  if (mode == Mode::surface) {
    if (!(surface.v_max > 0.0) || !std::isfinite(surface.v_max))
      throw ConfigError("surface.v_max must be positive");
    if (surface.v_points < 2) throw ConfigError("surface.v_points must be at least 2");
    if (!std::isfinite(surface.y0)) throw ConfigError("surface.y0 must be finite");
  }
  if (mode == Mode::verify) {
    if (!(verify.tol > 0.0)) throw ConfigError("verify.tol must be positive");
    for (double t : verify_times())
      if (!(t >= 0.0 && t < m.horizon())) throw ConfigError("verify.times must lie in [0, T)");
    if (verify.mc_paths > 0 && verify.mc_paths < 10000)
      throw ConfigError("verify.mc_paths must be 0 or at least 10000");
  }
  if (mode == Mode::figures && preset.empty()) throw ConfigError("figures mode needs a preset");
}

void apply_ini(ExperimentConfig& cfg, std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  static const std::vector<std::string> known_sections{"run",  "market", "utility", "gda",
                                                       "solver", "hdra", "surface", "verify"};
  for (const auto& [section, body] : tree) {
    if (std::find(known_sections.begin(), known_sections.end(), section) == known_sections.end())
      throw ConfigError("config file: unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      const std::string val = trim(node.data());
      auto num = [&] { return to_double(full, val); };
      if (full == "run.mode") cfg.mode = parse_mode(val);
      else if (full == "run.out") cfg.output_path = val;
      else if (full == "run.preset") cfg.preset = val;
      else if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(to_integer(full, val));
      else if (full == "market.T") cfg.market.horizon = num();
      else if (full == "market.breakpoints") cfg.market.breakpoints = parse_list(val);
      else if (full == "market.mu") cfg.market.mu = parse_segments(full, val);
      else if (full == "market.sigma") cfg.market.sigma = parse_segments(full, val);
      else if (full == "utility.kind") cfg.utility.kind = val;
      else if (full == "utility.rho") cfg.utility.rho = num();
      else if (full == "utility.rho2") cfg.utility.rho2 = num();
      else if (full == "gda.beta") cfg.gda.beta = num();
      else if (full == "gda.delta") cfg.gda.delta = num();
      else if (full == "solver.grid_step") cfg.solver.grid_step = num();
      else if (full == "solver.picard_tol") cfg.solver.picard_tol = num();
      else if (full == "solver.max_picard_iters")
        cfg.solver.max_picard_iters = static_cast<int>(to_integer(full, val));
      else if (full == "solver.window_shrink") cfg.solver.window_shrink = num();
      else if (full == "solver.max_shrinks")
        cfg.solver.max_shrinks = static_cast<int>(to_integer(full, val));
      else if (full == "solver.initial_guess") cfg.solver.initial_guess = parse_guess(val);
      else if (full == "solver.memoize") cfg.solver.memoize = to_bool(full, val);
      else if (full == "hdra.alpha") cfg.hdra_alpha = num();
      else if (full == "surface.v_max") cfg.surface.v_max = num();
      else if (full == "surface.v_points") cfg.surface.v_points = static_cast<int>(to_integer(full, val));
      else if (full == "surface.y0") cfg.surface.y0 = num();
      else if (full == "verify.tol") cfg.verify.tol = num();
      else if (full == "verify.times") cfg.verify.times = parse_list(val);
      else if (full == "verify.input") cfg.verify.input = val;
      else if (full == "verify.mc_paths") {
        const long long n = to_integer(full, val);
        if (n < 0) throw ConfigError("verify.mc_paths must be >= 0");
        cfg.verify.mc_paths = static_cast<std::size_t>(n);
      } else {
        throw ConfigError("config file: unknown key '" + full + "'");
      }
    }
  }
}

void apply_ini(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  apply_ini(cfg, in);
}

}  // namespace gda::cli
