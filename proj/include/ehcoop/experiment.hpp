#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "ehcoop/rates.hpp"
#include "ehcoop/region.hpp"

namespace ehcoop {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value experiment description. Keys are validated on entry so
// a typo fails before anything runs; values are parsed when the mode
// resolves them. CLI flags override file entries through set().
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  // Throws ConfigError on a key the runner does not know.
  void set(const std::string& key, const std::string& value);

  // Parses a config file: one key=value per line, '#' comments, blank
  // lines ignored. Duplicate keys are rejected.
  static ExperimentConfig from_file(const std::string& path);
};

// Dispatches one experiment mode and writes its dataset plus a .meta
// sidecar into out_dir. Returns the process exit status: 0 on success,
// 2 when validate-mode checks fail. Configuration problems throw
// ConfigError.
int run_experiment(const ExperimentConfig& cfg);

// Scenario presets for the parameter studies; constants are fixed by the
// study definitions and unit-tested.
ScenarioParams fig1_scenario();
ScenarioParams fig2_scenario(double lambda_e);
ScenarioParams fig3_scenario(double lambda_e);
PrimaryRateFamily fig4_family(double snr_ps_pd);

// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double v);

}  // namespace ehcoop
