#pragma once

// Named, reproducible experiments spanning the library. Each experiment
// declares its parameters with defaults; a run resolves the parameters from
// a config document, flag overrides and the DIFFUSION_SEED environment
// variable (in increasing precedence for the seed), rejecting unknown keys.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "difflab/report_io.hpp"

namespace difflab {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamType { Integer, Real, Text, IntegerList };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Real;
  /// null marks a required parameter.
  ordered_json default_value;
  std::string help;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

const std::vector<ExperimentInfo>& experiments();
/// Throws UsageError for an unknown name.
const ExperimentInfo& find_experiment(std::string_view name);

struct ConfigSources {
  /// Parsed config document: {"experiment", "seed", "out", "params": {...}}.
  std::optional<ordered_json> file;
  /// key=value overrides from the command line, applied in order.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> seed_flag;
  std::optional<std::string> seed_env;
  std::optional<std::string> out_flag;
};

struct ExperimentConfig {
  std::string experiment;
  /// Fully resolved parameters in declaration order, including "seed".
  ordered_json params;
  std::filesystem::path out_dir;
};

inline constexpr const char* kDefaultOutDir = "results";

/// Throws UsageError on unknown keys, malformed values or a missing
/// required parameter.
ExperimentConfig resolve_config(const std::string& experiment,
                                const ConfigSources& sources);

struct ExperimentOutput {
  Report report;
  std::vector<CsvTable> tables;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace difflab
