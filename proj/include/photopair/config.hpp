#pragma once

// Flat `section.key = value` scenario files with `#` comments and optional
// `preset = <name>` base. Unknown keys are rejected; every default is resolved
// so a dump of the scenario is a complete, reloadable description.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "photopair/cascade.hpp"
#include "photopair/collision.hpp"
#include "photopair/field.hpp"

namespace photopair::runner {

/// Raw key/value pairs with their source line (0 for preset entries).
struct RawConfig {
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
};

/// Syntax only. Throws ConfigError with the offending line.
RawConfig parse_config(std::istream& in);
RawConfig parse_config_string(const std::string& text);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RawConfig preset_config(const std::string& name);

enum class ScanVariable { RelativePhase, PumpProbeDelay, Detector1Theta };
std::string to_string(ScanVariable v);

struct ScanSpec {
  ScanVariable variable = ScanVariable::RelativePhase;
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;
  std::string control;  // component whose phase is the relative phase
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  int theta_points = 2;

  /// Inclusive linear grid over [lo, hi].
  std::vector<double> values() const;
  /// Detector-1 polar angles; for theta scans the scan values themselves.
  std::vector<double> thetas() const;
};

struct PathwayConfig {
  std::string name;
  std::vector<std::string> steps;  // component labels
  std::optional<std::string> intermediate;
};

struct DetectorConfig {
  double theta = 0.0;
  double phi = 0.0;
  std::string analyzer = "unresolved";  // sigma, sigma_prime, unresolved, x, y, z

  cascade::DetectorSpec spec(double energy) const;
};

struct Scenario {
  std::string preset;
  field::FieldSpec field;
  std::vector<PathwayConfig> pathways;
  ScanSpec scan;
  DetectorConfig detector1;
  DetectorConfig detector2;
  collision::TargetManifold target;
  collision::CollisionGeometry geometry;
  std::string cascade_middle = "3p";
  std::string cascade_lower = "1s";
  double cascade_window = 0.05;
  double energy_center = 15.755;
  double energy_halfwidth = 0.0;
  int energy_points = 64;
  collision::CollisionQuadrature quadrature;

  cascade::CascadeScheme cascade_scheme() const;
  /// Pathways with their steps bound to the current field components.
  std::vector<ionization::PathwaySpec> pathway_specs() const;
};

/// Applies the preset, defaults and validation. Throws ConfigError.
Scenario resolve(const RawConfig& raw);
Scenario load_config(const std::string& path);
Scenario load_config_string(const std::string& text);

/// Every resolved field as sorted (key, value) pairs.
std::vector<std::pair<std::string, std::string>> resolved_entries(const Scenario& s);
/// Canonical text form; load_config_string(dump(s)) reproduces s.
std::string dump(const Scenario& s);
/// dump(load_config_string(text)).
std::string normalize(const std::string& text);

/// "4d" -> (4, 2). Throws ConfigError.
std::pair<int, int> parse_level_label(const std::string& label);

}  // namespace photopair::runner
