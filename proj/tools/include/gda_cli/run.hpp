#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gda_cli/config.hpp"

namespace gda::cli {

namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int verification_failed = 1;
inline constexpr int config = 2;
inline constexpr int solver = 3;
inline constexpr int io = 4;
}  // namespace exit_status

enum class PresetKind { indifference, strategy, hdra };

struct PresetSeries {
  std::string label;  // file name suffix
  double beta;
  double delta;
  double alpha = 0.0;  // hdra only
};

/// Figure presets on the reference market (mu = 0.06, sigma = 0.3, T = 3, rho = 1).
struct Preset {
  std::string name;
  std::string description;
  PresetKind kind;
  std::vector<PresetSeries> series;
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);  // throws ConfigError

struct RunResult {
  int exit_code = exit_status::ok;
  std::string message;
  std::vector<std::filesystem::path> artifacts;
  std::filesystem::path manifest;
};

/// Validates, dispatches on the mode, writes CSV artifacts and manifest.json under
/// cfg.output_path. Never throws; failures are reported through the exit code and `log`.
RunResult run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace gda::cli
