#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biasaudit/facets.hpp"
#include "biasaudit/forest.hpp"
#include "biasaudit/report.hpp"
#include "biasaudit/table.hpp"

namespace biasaudit {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct TaskSpec {
  std::string label;           // label column name
  std::string positive_class;  // decoded value; used for binary F1/confusion
};

struct DatasetRun {
  std::string name;  // e.g. "2021-icu"; names output files
  std::filesystem::path csv;
  TaskSpec task;
};

// The single declarative source of truth for a run. Relative paths are
// resolved against the config file's directory at load time.
struct RunConfig {
  int config_version = kConfigVersion;
  std::uint64_t seed = 0;
  bool seed_set = false;  // seed is mandatory; never defaulted from the clock
  int threads = 1;
  std::filesystem::path output_dir = "out";
  std::filesystem::path geometry;  // empty: skip choropleth rendering
  std::string geometry_name_property = "name";
  CsvOptions csv;
  std::vector<ColumnSchema> schema;
  std::string group_key_column;
  GroupKeyMap grouping;
  std::vector<FacetSpec> facets;
  std::vector<DatasetRun> runs;
  ForestConfig learner;
  double smoothing_epsilon = 0.0;
  DisagreementThresholds thresholds;
  double holdout_fraction = 0.0;
  // Optional fixed choropleth ranges per metric ("ci", "kl", "ks").
  std::map<std::string, std::pair<double, double>> figure_ranges;
  std::string timestamp;  // copied into reports verbatim; empty by default
};

RunConfig load_config(const std::filesystem::path& path);

// Structural checks: version, mandatory seed, role constraints, facet
// validity, task references. Throws ConfigError with the offending field.
void validate_config(const RunConfig& config);

// FNV-1a over the canonical (sorted-key) JSON form of the parsed config.
std::string config_fingerprint(const RunConfig& config);

}  // namespace biasaudit
