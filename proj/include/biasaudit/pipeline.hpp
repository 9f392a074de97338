#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biasaudit/config.hpp"
#include "biasaudit/report.hpp"

namespace biasaudit {

struct RunArtifacts {
  std::string run_name;
  std::filesystem::path report_path;
  std::vector<std::filesystem::path> figures;
  std::vector<std::filesystem::path> models;
};

struct PipelineResult {
  std::vector<RunArtifacts> runs;
};

// Pre-training audit for one dataset run: ingest, drop, task extraction,
// partition, facet metrics, disagreement flags. Never trains a model.
BiasReport audit_dataset(const RunConfig& config, const DatasetRun& run);

struct EvaluateResult {
  BiasReport report;
  std::vector<std::optional<ForestModel>> models;  // one slot per group
};

// Audit plus per-group training and the G x G cross evaluation. When
// cached_audit carries the same config fingerprint and seed, its bias cells
// are reused instead of recomputed (the results are identical either way).
EvaluateResult evaluate_dataset(const RunConfig& config, const DatasetRun& run,
                                const BiasReport* cached_audit = nullptr);

// Subcommand entry points: run every dataset, write reports, figures and
// models under config.output_dir.
PipelineResult cmd_audit(const RunConfig& config);
PipelineResult cmd_evaluate(const RunConfig& config);
// Re-renders figures from a saved report (report_<run>.json, falling back to
// audit_<run>.json).
PipelineResult cmd_render(const RunConfig& config);

// Output naming scheme, exposed for tests and the render command.
std::filesystem::path audit_report_path(const RunConfig& config, const DatasetRun& run);
std::filesystem::path eval_report_path(const RunConfig& config, const DatasetRun& run);

}  // namespace biasaudit
