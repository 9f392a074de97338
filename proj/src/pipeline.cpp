#include "biasaudit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "biasaudit/errors.hpp"
#include "biasaudit/figures.hpp"
#include "biasaudit/geometry.hpp"
#include "biasaudit/metrics.hpp"
#include "biasaudit/rng.hpp"
#include "biasaudit/textutil.hpp"

namespace biasaudit {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto with_context(const std::string& ctx, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(ctx + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(ctx + ": " + e.what());
  }
}

// Label columns other than the active task's become drop columns for this
// run, so a second task's target never leaks into the feature set.
std::vector<ColumnSchema> schema_for_run(const RunConfig& config, const DatasetRun& run) {
  std::vector<ColumnSchema> schema = config.schema;
  for (auto& col : schema) {
    if (col.role == ColumnRole::label && col.name != run.task.label) {
      col.role = ColumnRole::drop;
    }
  }
  return schema;
}

struct StagedData {
  IngestSummary ingest;
  TaskData task;
  GroupPartition partition;
};

StagedData load_staged(const RunConfig& config, const DatasetRun& run) {
  StagedData staged;
  auto ingested = with_context("ingest '" + run.csv.string() + "'", [&] {
    return ingest_csv(run.csv, schema_for_run(config, run), config.csv);
  });
  staged.ingest = ingested.summary;
  const DataTable table = drop_columns(ingested.table);
  staged.task = with_context("task '" + run.task.label + "'",
                             [&] { return extract_task(table, run.task.label); });
  staged.partition = with_context("partition", [&] {
    return partition_by_key(staged.task.features, config.group_key_column, config.grouping);
  });
  return staged;
}

BiasReport build_report(const RunConfig& config, const DatasetRun& run,
                        const StagedData& staged, std::vector<MetricCell> bias) {
  BiasReport report;
  report.meta.config_fingerprint = config_fingerprint(config);
  report.meta.seed = config.seed;
  report.meta.timestamp = config.timestamp;
  report.meta.tool_version = kToolVersion;
  report.dataset.name = run.name;
  report.dataset.csv_path = run.csv.string();
  report.dataset.ingest = staged.ingest;
  report.dataset.excluded_missing_label = staged.task.excluded_missing_label;
  report.dataset.unassigned_rows = staged.partition.unassigned;
  report.task_label = run.task.label;
  report.label_names = staged.task.label_names;
  report.positive_class = run.task.positive_class;
  report.groups = staged.partition.group_names;
  report.group_sizes = staged.partition.group_sizes;
  report.facets = config.facets;
  report.thresholds = config.thresholds;
  report.bias = std::move(bias);
  return report;
}

std::vector<MetricCell> compute_bias_cells(const RunConfig& config, const StagedData& staged) {
  std::vector<MetricCell> cells;
  const auto n_classes = staged.task.label_names.size();
  for (std::size_t g = 0; g < staged.partition.group_names.size(); ++g) {
    const auto rows = staged.partition.rows_of(g);
    auto group_cells =
        audit_group(staged.task.features, staged.partition.group_names[g], rows, config.facets,
                    staged.task.labels, n_classes, config.smoothing_epsilon);
    for (auto& cell : group_cells) cells.push_back(std::move(cell));
  }
  return cells;
}

std::int32_t resolve_positive_class(const DatasetRun& run,
                                    const std::vector<std::string>& label_names) {
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    if (label_names[i] == run.task.positive_class) return static_cast<std::int32_t>(i);
  }
  std::string classes;
  for (const auto& l : label_names) classes += (classes.empty() ? "" : ", ") + l;
  throw ConfigError("run '" + run.name + "': positive_class '" + run.task.positive_class +
                    "' is not a task label (observed: " + classes + ")");
}

std::string metric_title(const std::string& metric) {
  if (metric == "ci") return "Class Imbalance";
  if (metric == "kl") return "KL Divergence (nats)";
  return "Kolmogorov-Smirnov";
}

std::optional<double> metric_value(const MetricCell& cell, const std::string& metric) {
  if (metric == "ci") return cell.ci;
  if (metric == "kl") return cell.kl_nats;
  return cell.ks;
}

std::vector<fs::path> emit_choropleths(const RunConfig& config, const BiasReport& report,
                                       const fs::path& out_dir) {
  std::vector<fs::path> files;
  if (config.geometry.empty()) return files;
  const GeometrySet geometry = with_context("geometry", [&] {
    return load_geojson(config.geometry, config.geometry_name_property);
  });

  for (const std::string metric : {"ci", "kl", "ks"}) {
    for (const auto& facet : report.facets) {
      std::vector<RegionValue> values;
      for (const auto& group : report.groups) {
        RegionValue rv;
        rv.group = group;
        for (const auto& cell : report.bias) {
          if (cell.group == group && cell.attribute == facet.attribute) {
            rv.value = metric_value(cell, metric);
            break;
          }
        }
        values.push_back(std::move(rv));
      }
      ChoroplethStyle style;
      style.title = report.dataset.name + ": " + metric_title(metric) + " by group (" +
                    facet.attribute + ")";
      if (auto it = config.figure_ranges.find(metric); it != config.figure_ranges.end()) {
        style.range = it->second;
      }
      const fs::path file =
          out_dir / ("choropleth_" + sanitize_filename(report.dataset.name) + "_" + metric +
                     "_" + sanitize_filename(facet.attribute) + ".svg");
      const std::string svg = with_context("choropleth " + metric, [&] {
        return render_choropleth(values, geometry, style);
      });
      std::ofstream out(file, std::ios::binary);
      if (!out) throw DataError("cannot write figure: " + file.string());
      out << svg;
      files.push_back(file);
    }
  }
  return files;
}

std::vector<fs::path> emit_prediction_figures(const BiasReport& report,
                                              const fs::path& out_dir) {
  std::vector<fs::path> files;
  if (!report.evaluation) return files;
  for (const auto& cell : report.evaluation->cells) {
    if (!cell.valid) continue;
    for (const auto& confusion : cell.confusion) {
      if (!confusion.facet_a && !confusion.facet_d) {
        std::cerr << "notice: skipping prediction figure for " << cell.train_group << " -> "
                  << cell.test_group << " (" << confusion.attribute << "): "
                  << confusion.null_reason << "\n";
        continue;
      }
      const std::string title = report.dataset.name + ": model " + cell.train_group + " on " +
                                cell.test_group + " (" + confusion.attribute + ")";
      const fs::path file =
          out_dir / ("prediction_" + sanitize_filename(report.dataset.name) + "_" +
                     sanitize_filename(confusion.attribute) + "_train_" +
                     sanitize_filename(cell.train_group) + "_test_" +
                     sanitize_filename(cell.test_group) + ".svg");
      std::ofstream out(file, std::ios::binary);
      if (!out) throw DataError("cannot write figure: " + file.string());
      out << render_prediction_analysis(confusion, title);
      files.push_back(file);
    }
  }
  return files;
}

}  // namespace

std::filesystem::path audit_report_path(const RunConfig& config, const DatasetRun& run) {
  return config.output_dir / ("audit_" + sanitize_filename(run.name) + ".json");
}

std::filesystem::path eval_report_path(const RunConfig& config, const DatasetRun& run) {
  return config.output_dir / ("report_" + sanitize_filename(run.name) + ".json");
}

BiasReport audit_dataset(const RunConfig& config, const DatasetRun& run) {
  const StagedData staged = load_staged(config, run);
  auto cells = compute_bias_cells(config, staged);
  flag_disagreement(cells, config.thresholds);
  return build_report(config, run, staged, std::move(cells));
}

EvaluateResult evaluate_dataset(const RunConfig& config, const DatasetRun& run,
                                const BiasReport* cached_audit) {
  const StagedData staged = load_staged(config, run);
  const std::string fingerprint = config_fingerprint(config);

  std::vector<MetricCell> cells;
  if (cached_audit != nullptr && cached_audit->meta.config_fingerprint == fingerprint &&
      cached_audit->meta.seed == config.seed && cached_audit->dataset.name == run.name) {
    cells = cached_audit->bias;
  } else {
    cells = compute_bias_cells(config, staged);
    flag_disagreement(cells, config.thresholds);
  }

  const auto& partition = staged.partition;
  const auto n_groups = partition.group_names.size();
  const auto n_classes = staged.task.label_names.size();

  EvaluateResult result;
  result.models.resize(n_groups);
  std::vector<std::vector<std::size_t>> diag_rows(n_groups);
  const bool holdout = config.holdout_fraction > 0.0;

  for (std::size_t g = 0; g < n_groups; ++g) {
    auto rows = partition.rows_of(g);
    std::vector<std::size_t> train_rows;
    if (holdout) {
      auto split = holdout_split(rows, config.holdout_fraction,
                                 mix_seed(config.seed, 0x9000 + g));
      train_rows = std::move(split.train);
      diag_rows[g] = std::move(split.eval);
    } else {
      train_rows = rows;
      diag_rows[g] = rows;
    }

    ForestConfig learner = config.learner;
    learner.master_seed = mix_seed(config.seed, g);  // independent stream per group

    const DataTable train_table = staged.task.features.select_rows(train_rows);
    std::vector<std::int32_t> train_labels;
    train_labels.reserve(train_rows.size());
    for (auto r : train_rows) train_labels.push_back(staged.task.labels[r]);

    try {
      TrainInfo info;
      info.group = partition.group_names[g];
      info.task = run.name;
      info.label_names = staged.task.label_names;
      result.models[g] = train_forest(train_table, train_labels, n_classes, learner, info);
    } catch (const DataError& e) {
      std::cerr << "notice: group '" << partition.group_names[g] << "' has no model: "
                << e.what() << "\n";
      result.models[g] = std::nullopt;
    }
  }

  CrossEvalOptions options;
  options.n_classes = n_classes;
  options.positive_class =
      n_classes == 2 ? resolve_positive_class(run, staged.task.label_names) : 0;
  EvalMatrix matrix = with_context("cross-evaluate", [&] {
    return cross_evaluate(result.models, partition, staged.task.features, staged.task.labels,
                          config.facets, options, holdout ? &diag_rows : nullptr);
  });

  result.report = build_report(config, run, staged, std::move(cells));
  result.report.evaluation = std::move(matrix);
  result.report.f1_mode = n_classes == 2 ? "binary" : "macro";
  result.report.holdout_fraction = config.holdout_fraction;
  return result;
}

PipelineResult cmd_audit(const RunConfig& config) {
  validate_config(config);
  fs::create_directories(config.output_dir);
  PipelineResult result;
  for (const auto& run : config.runs) {
    RunArtifacts artifacts;
    artifacts.run_name = run.name;
    const BiasReport report = with_context("run '" + run.name + "'",
                                           [&] { return audit_dataset(config, run); });
    artifacts.report_path = audit_report_path(config, run);
    emit_report(report, artifacts.report_path);
    artifacts.figures = emit_choropleths(config, report, config.output_dir);
    result.runs.push_back(std::move(artifacts));
  }
  return result;
}

PipelineResult cmd_evaluate(const RunConfig& config) {
  validate_config(config);
  fs::create_directories(config.output_dir);
  PipelineResult result;
  for (const auto& run : config.runs) {
    RunArtifacts artifacts;
    artifacts.run_name = run.name;

    // Reuse a previous audit when its fingerprint and seed match.
    std::optional<BiasReport> cached;
    const fs::path audit_path = audit_report_path(config, run);
    if (fs::exists(audit_path)) {
      try {
        cached = load_report(audit_path);
      } catch (const DataError&) {
        cached.reset();  // stale or foreign file; recompute
      }
    }

    EvaluateResult eval = with_context("run '" + run.name + "'", [&] {
      return evaluate_dataset(config, run, cached ? &*cached : nullptr);
    });

    artifacts.report_path = eval_report_path(config, run);
    emit_report(eval.report, artifacts.report_path);

    for (std::size_t g = 0; g < eval.models.size(); ++g) {
      if (!eval.models[g]) continue;
      const fs::path model_path =
          config.output_dir / ("model_" + sanitize_filename(run.name) + "_" +
                               sanitize_filename(eval.report.groups[g]) + ".forest");
      save_forest(*eval.models[g], model_path);
      artifacts.models.push_back(model_path);
    }

    artifacts.figures = emit_choropleths(config, eval.report, config.output_dir);
    auto prediction_figures = emit_prediction_figures(eval.report, config.output_dir);
    artifacts.figures.insert(artifacts.figures.end(), prediction_figures.begin(),
                             prediction_figures.end());
    result.runs.push_back(std::move(artifacts));
  }
  return result;
}

PipelineResult cmd_render(const RunConfig& config) {
  validate_config(config);
  fs::create_directories(config.output_dir);
  PipelineResult result;
  for (const auto& run : config.runs) {
    RunArtifacts artifacts;
    artifacts.run_name = run.name;
    fs::path source = eval_report_path(config, run);
    if (!fs::exists(source)) source = audit_report_path(config, run);
    if (!fs::exists(source)) {
      throw DataError("run '" + run.name + "': no saved report to render (looked for " +
                      eval_report_path(config, run).string() + " and " +
                      audit_report_path(config, run).string() + ")");
    }
    const BiasReport report = load_report(source);
    artifacts.report_path = source;
    artifacts.figures = emit_choropleths(config, report, config.output_dir);
    auto prediction_figures = emit_prediction_figures(report, config.output_dir);
    artifacts.figures.insert(artifacts.figures.end(), prediction_figures.begin(),
                             prediction_figures.end());
    result.runs.push_back(std::move(artifacts));
  }
  return result;
}

}  // namespace biasaudit
