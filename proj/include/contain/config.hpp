// Flat key-value scenario configuration (dotted section prefixes), the exact
// grammar behind the CLI.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "contain/policy.hpp"
#include "contain/simulate.hpp"
#include "contain/verify.hpp"

namespace contain {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line) + ": " + message),
        line(line) {}

  int line = 0;
};

struct OutputOptions {
  std::string dir = ".";
  bool trajectories = true;
  bool curves = true;
  bool events = false;
};

struct ScenarioConfig {
  TumorModel model;
  TumorState init;
  Thresholds thr;
  IntegratorConfig integ;
  std::vector<std::pair<std::string, Policy>> policies;  // declaration order
  OutputOptions outputs;
};

/// Parses the flat `section.key = value` grammar. Unknown or duplicate keys
/// and invariant violations raise ConfigError with the offending line.
ScenarioConfig parse_scenario_config(const std::string& text);

ScenarioConfig load_scenario_config(const std::string& path);

/// Canonical echo; re-parsing it reproduces the scenario exactly.
std::string render_scenario_config(const ScenarioConfig& cfg);

}  // namespace contain
