#pragma once

// Scenario configuration files, trajectory CSV and report JSON.
//
// Config format: sections in brackets, `key = value` lines, `#` comments.
//
//   [domain]          length, grid (integer or auto = 4 * modes)
//   [operator]        damping
//   [nonlinearity]    kind (nicholson | zero | table), p, table_w, table_b
//   [spatial_kernel]  kind (constant | gaussian), f0, alpha
//   [delay]           span, law (constant | sigmoid), eta0, eta_max, c0, c1, c2,
//                     mode (discrete | distributed), n, eps0, eps_ratio
//   [integration]     dt, horizon, modes
//   [initial]         u0 (comma separated coefficients), history (constant | zero | ramp)
//   [output]          dir, coefficients (true | false)
//
// Numbers accept products and quotients of literals and `pi`, e.g. `pi`, `1/64`, `2*pi`.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdpde/analysis.hpp"
#include "sdpde/integrator.hpp"

namespace sdpde {

class ConfigError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioOverrides {
  std::optional<double> dt;
  std::optional<int> modes;
};

// Throws ConfigError ("line N: ...") for syntax, unknown sections/keys and
// out-of-range values, and ScenarioError for cross-field invariants.
Scenario parse_scenario(const std::string& text, const ScenarioOverrides& overrides = {});
Scenario load_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

// Fully resolved config; parse_scenario(to_config_text(s)) reproduces s.
std::string to_config_text(const Scenario& scenario);

double parse_number(const std::string& token);

void export_trajectory(const Trajectory& traj, const std::string& path, bool coefficients = true);
// Reads a CSV written by export_trajectory. States are filled when the
// coefficient columns are present.
Trajectory read_trajectory_csv(const std::string& path);

std::string report_json(const VerificationReport& report);
void export_report(const VerificationReport& report, const std::string& path);

// One CSV per record series set: columns are the series names.
void export_series(const CheckRecord& record, const std::string& path);

}  // namespace sdpde
