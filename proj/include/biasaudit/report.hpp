#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/evaluation.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/table.hpp"

namespace biasaudit {

inline constexpr int kReportVersion = 1;

struct DisagreementThresholds {
  double ci_high = 0.3;
  double kl_low = 0.05;
  double ks_low = 0.1;
};

struct RunMeta {
  std::string config_fingerprint;
  std::uint64_t seed = 0;
  std::string timestamp;  // embedded verbatim; left empty for reproducible runs
  std::string tool_version;
};

struct DatasetSummary {
  std::string name;
  std::string csv_path;
  IngestSummary ingest;
  std::size_t excluded_missing_label = 0;
  std::size_t unassigned_rows = 0;
};

struct BiasReport {
  RunMeta meta;
  DatasetSummary dataset;
  std::string task_label;
  std::vector<std::string> label_names;
  std::string positive_class;
  std::vector<std::string> groups;
  std::vector<std::size_t> group_sizes;
  std::vector<FacetSpec> facets;
  DisagreementThresholds thresholds;
  std::vector<MetricCell> bias;  // group-major, facets in declared order
  std::optional<EvalMatrix> evaluation;
  std::string f1_mode;  // "binary" or "macro"
  double holdout_fraction = 0.0;
};

struct FlagRef {
  std::string group;
  std::string attribute;
};

// Marks cells where CI signals risk while KL and KS both stay low — the
// metric-disagreement pattern. Returns the flagged coordinates.
std::vector<FlagRef> flag_disagreement(std::vector<MetricCell>& cells,
                                       const DisagreementThresholds& thresholds);

nlohmann::ordered_json report_to_json(const BiasReport& report);
BiasReport report_from_json(const nlohmann::ordered_json& doc);

// Writes the JSON document (2-space indent, trailing newline). Byte-identical
// for identical report contents.
void emit_report(const BiasReport& report, const std::filesystem::path& path);
BiasReport load_report(const std::filesystem::path& path);

}  // namespace biasaudit
