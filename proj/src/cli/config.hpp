#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "qfc/ecs.hpp"
#include "qfc/params.hpp"

namespace qfc::cli {

/// Malformed JSON or an unreadable config file.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed JSON that violates the schema: unknown keys, wrong types,
/// out-of-range values, or keys a scenario does not use.
class ConfigValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output files could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scenario { kRiccati, kFilter, kOracle, kLqg, kHjbCheck, kMc };

std::string to_string(Scenario s);

struct GridConfig {
  double x_min = -10.0;
  double x_max = 10.0;
  int n_points = 1024;
};

struct CostConfig {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d E = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
  double horizon = 1.0;
};

struct BoxConfig {
  double q_max = 2.0;
  double p_max = 2.0;
};

/// One fully validated scenario description. Fields a scenario does not use
/// keep their defaults; the schema rejects configs that try to set them.
struct ScenarioConfig {
  Scenario scenario = Scenario::kRiccati;
  PhysicalParams params;
  ExtendedCoherentState state0;
  std::optional<GridConfig> grid;
  std::optional<CostConfig> cost;
  Controls controls;
  double dt = 1e-3;
  double t0 = 0.0;
  double horizon = 1.0;  // riccati / filter / oracle time span
  Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  int n_traj = 1000;
  int n_check = 1000;
  BoxConfig box;
  std::uint64_t seed = 0;
  int workers = 1;
  bool write_series = false;
  std::string out_dir = ".";
};

/// Parses and validates a JSON config from text; origin names the source in
/// error messages.
ScenarioConfig parse_config(const std::string& text, const std::string& origin);

/// Reads, parses, and validates a config file. Unreadable file or malformed
/// JSON -> ConfigParseError; schema violations -> ConfigValidationError with
/// the offending key named (and a nearest-key suggestion for typos).
ScenarioConfig load_config(const std::string& path);

}  // namespace qfc::cli
