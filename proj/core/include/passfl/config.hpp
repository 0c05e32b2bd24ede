#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "passfl/driver.hpp"
#include "passfl/flsim.hpp"
#include "passfl/scenario.hpp"

namespace passfl {

struct TrainingConfig {
  TaskSpec task;
  Pipeline pipeline = Pipeline::kFedPass;
  int rounds = 50;
  int local_steps = 5;
  int batch_size = 32;
  /// Optional CSV import; replaces the synthetic training set.
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> test_dataset;
  int label_bins = 4;  // quantile classes for regression targets
};

/// Everything a run reads from its JSON file. Every section and key is
/// optional; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 1;
  int num_devices = 12;
  ScenarioTemplate scenario;
  /// Explicit device list; overrides num_devices and random placement.
  std::optional<std::vector<DeviceProfile>> devices;

  double lambda = 0.5;
  std::vector<double> lambda_grid;  // empty: default_lambda_grid()
  OptimizerSettings optimizer;
  TrainingConfig training;
};

/// Throws ConfigError naming the offending key path, e.g.
/// "scenario.radio.n_eff: must be >= 1".
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Explicit devices when given, otherwise generate_scenario(seed, ...).
Scenario build_scenario(const RunConfig& cfg);

/// Config JSON that pins the scenario's devices, suitable as input to
/// every subcommand.
std::string scenario_config_json(const RunConfig& cfg, const Scenario& s);

}  // namespace passfl
