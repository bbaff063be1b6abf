#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmslow/discrete_flow.hpp"
#include "pmslow/grid.hpp"
#include "pmslow/limit_flow.hpp"

namespace pmslow {

enum class Experiment { kSimulateDiscrete, kSimulateLimit, kConverge, kAudits, kGamma, kSlope, kWellPrep };

std::optional<Experiment> parse_experiment(std::string_view name);
std::string_view experiment_name(Experiment e);

/// Exit statuses of a run.
enum ExitStatus : int { kExitOk = 0, kExitAuditFailed = 1, kExitConfigError = 2, kExitNumericalAbort = 3 };

struct RunConfig {
  Experiment experiment = Experiment::kSimulateDiscrete;
  std::string name = "config";
  /// Exactly one of the two initial data is set.
  std::optional<PlateauFunction> plateau;
  std::optional<GridFunction> grid;
  std::size_t n = 64;
  std::vector<std::size_t> n_ladder{32, 64, 128, 256};
  double t_end = 1.0;
  IntegratorOptions integrator;
  LimitOptions limit;
  std::uint64_t seed = 20240611;
  /// Randomized instances of the audits experiment.
  std::size_t instances = 200;
  /// Extra jump of the well-preparation generator: position and height as a
  /// multiple of 1/n.
  double extra_jump_x = 0.25;
  double extra_jump_height = 2.0;
  bool write_states = false;
  /// Normalized JSON echo of the configuration, written to the manifest.
  std::string echo;

  /// Parses a JSON document; throws ConfigError naming the offending field.
  static RunConfig from_json(std::string_view text, Experiment experiment);
  /// Embedded configuration by name; throws ConfigError for unknown names.
  static RunConfig preset(std::string_view name, Experiment experiment);

  /// Throws ConfigError when the configuration cannot run.
  void validate() const;
};

std::vector<std::string> preset_names();

struct RunResult {
  int status = kExitOk;
  bool passed = true;
  double worst_slack = 0.0;
  std::vector<std::filesystem::path> files;
  std::string message;
};

/// Validates, executes and writes CSVs, summary.json and manifest.json into
/// out_dir. Nothing is written when validation fails. threads = 0 selects the
/// hardware concurrency.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir, unsigned threads = 0);

/// Library version string.
std::string_view version();

}  // namespace pmslow
