#include "biasaudit/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "biasaudit/errors.hpp"

namespace biasaudit {

using nlohmann::ordered_json;

std::vector<FlagRef> flag_disagreement(std::vector<MetricCell>& cells,
                                       const DisagreementThresholds& thresholds) {
  std::vector<FlagRef> flags;
  for (auto& cell : cells) {
    cell.disagreement = false;
    if (!cell.ci || !cell.kl_nats || !cell.ks) continue;
    if (!std::isfinite(*cell.kl_nats)) continue;  // infinite KL is loud, not low
    if (std::fabs(*cell.ci) >= thresholds.ci_high && *cell.kl_nats <= thresholds.kl_low &&
        *cell.ks <= thresholds.ks_low) {
      cell.disagreement = true;
      flags.push_back({cell.group, cell.attribute});
    }
  }
  return flags;
}

namespace {

ordered_json json_kl(const std::optional<double>& kl) {
  if (!kl) return nullptr;
  if (std::isinf(*kl)) return "inf";
  return *kl;
}

std::optional<double> kl_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw DataError("report: unexpected kl_nats value '" + j.get<std::string>() + "'");
  }
  return j.get<double>();
}

ordered_json facet_to_json(const FacetSpec& f) {
  return ordered_json{{"attribute", f.attribute},
                      {"advantaged", f.advantaged},
                      {"disadvantaged", f.disadvantaged}};
}

FacetSpec facet_from_json(const ordered_json& j) {
  FacetSpec f;
  f.attribute = j.at("attribute").get<std::string>();
  f.advantaged = j.at("advantaged").get<std::vector<std::string>>();
  f.disadvantaged = j.at("disadvantaged").get<std::vector<std::string>>();
  return f;
}

ordered_json cell_to_json(const MetricCell& cell, const std::vector<std::string>& label_names) {
  ordered_json j;
  j["group"] = cell.group;
  j["attribute"] = cell.attribute;
  j["counts"] = {{"n_a", cell.counts.n_a},
                 {"n_d", cell.counts.n_d},
                 {"n_excluded", cell.counts.n_excluded}};
  if (cell.distribution) {
    ordered_json labels = ordered_json::array();
    for (auto code : cell.distribution->labels) {
      labels.push_back(label_names.at(static_cast<std::size_t>(code)));
    }
    j["distribution"] = {{"labels", labels},
                         {"p_a", cell.distribution->p_a},
                         {"p_d", cell.distribution->p_d}};
  } else {
    j["distribution"] = nullptr;
  }
  j["ci"] = cell.ci ? ordered_json(*cell.ci) : ordered_json(nullptr);
  j["kl_nats"] = json_kl(cell.kl_nats);
  j["ks"] = cell.ks ? ordered_json(*cell.ks) : ordered_json(nullptr);
  j["ks_label"] = cell.ks_arg_label
                      ? ordered_json(label_names.at(static_cast<std::size_t>(*cell.ks_arg_label)))
                      : ordered_json(nullptr);
  j["disagreement"] = cell.disagreement;
  j["null_reason"] = cell.null_reason.empty() ? ordered_json(nullptr)
                                              : ordered_json(cell.null_reason);
  return j;
}

std::int32_t label_code(const std::vector<std::string>& label_names, const std::string& name) {
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    if (label_names[i] == name) return static_cast<std::int32_t>(i);
  }
  throw DataError("report: unknown label '" + name + "'");
}

MetricCell cell_from_json(const ordered_json& j, const std::vector<std::string>& label_names) {
  MetricCell cell;
  cell.group = j.at("group").get<std::string>();
  cell.attribute = j.at("attribute").get<std::string>();
  cell.counts.n_a = j.at("counts").at("n_a").get<std::size_t>();
  cell.counts.n_d = j.at("counts").at("n_d").get<std::size_t>();
  cell.counts.n_excluded = j.at("counts").at("n_excluded").get<std::size_t>();
  if (!j.at("distribution").is_null()) {
    LabelDistribution dist;
    for (const auto& name : j.at("distribution").at("labels")) {
      dist.labels.push_back(label_code(label_names, name.get<std::string>()));
    }
    dist.p_a = j.at("distribution").at("p_a").get<std::vector<double>>();
    dist.p_d = j.at("distribution").at("p_d").get<std::vector<double>>();
    cell.distribution = std::move(dist);
  }
  if (!j.at("ci").is_null()) cell.ci = j.at("ci").get<double>();
  cell.kl_nats = kl_from_json(j.at("kl_nats"));
  if (!j.at("ks").is_null()) cell.ks = j.at("ks").get<double>();
  if (!j.at("ks_label").is_null()) {
    cell.ks_arg_label = label_code(label_names, j.at("ks_label").get<std::string>());
  }
  cell.disagreement = j.at("disagreement").get<bool>();
  if (!j.at("null_reason").is_null()) cell.null_reason = j.at("null_reason").get<std::string>();
  return cell;
}

ordered_json side_to_json(const std::optional<FacetSideConfusion>& side) {
  if (!side) return nullptr;
  return ordered_json{{"n", side->n},
                      {"tp", side->tp},
                      {"fp", side->fp},
                      {"tn", side->tn},
                      {"fn", side->fn},
                      {"tp_rate", side->tp_rate},
                      {"fp_rate", side->fp_rate},
                      {"tn_rate", side->tn_rate},
                      {"fn_rate", side->fn_rate}};
}

std::optional<FacetSideConfusion> side_from_json(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  FacetSideConfusion s;
  s.n = j.at("n").get<std::uint64_t>();
  s.tp = j.at("tp").get<std::uint64_t>();
  s.fp = j.at("fp").get<std::uint64_t>();
  s.tn = j.at("tn").get<std::uint64_t>();
  s.fn = j.at("fn").get<std::uint64_t>();
  s.tp_rate = j.at("tp_rate").get<double>();
  s.fp_rate = j.at("fp_rate").get<double>();
  s.tn_rate = j.at("tn_rate").get<double>();
  s.fn_rate = j.at("fn_rate").get<double>();
  return s;
}

ordered_json eval_cell_to_json(const EvalCell& cell) {
  ordered_json j;
  j["train_group"] = cell.train_group;
  j["test_group"] = cell.test_group;
  if (!cell.valid) {
    j["null_reason"] = cell.null_reason;
    return j;
  }
  j["n_test"] = cell.n_test;
  j["accuracy"] = cell.accuracy;
  j["f1"] = cell.f1;
  ordered_json confusion = ordered_json::array();
  for (const auto& c : cell.confusion) {
    ordered_json cj;
    cj["attribute"] = c.attribute;
    cj["facet_a"] = side_to_json(c.facet_a);
    cj["facet_d"] = side_to_json(c.facet_d);
    cj["null_reason"] = c.null_reason.empty() ? ordered_json(nullptr)
                                              : ordered_json(c.null_reason);
    confusion.push_back(std::move(cj));
  }
  j["confusion"] = std::move(confusion);
  return j;
}

EvalCell eval_cell_from_json(const ordered_json& j) {
  EvalCell cell;
  cell.train_group = j.at("train_group").get<std::string>();
  cell.test_group = j.at("test_group").get<std::string>();
  if (j.contains("null_reason") && !j.contains("accuracy")) {
    cell.null_reason = j.at("null_reason").get<std::string>();
    return cell;
  }
  cell.valid = true;
  cell.n_test = j.at("n_test").get<std::uint64_t>();
  cell.accuracy = j.at("accuracy").get<double>();
  cell.f1 = j.at("f1").get<double>();
  for (const auto& cj : j.at("confusion")) {
    ConfusionByFacet c;
    c.attribute = cj.at("attribute").get<std::string>();
    c.facet_a = side_from_json(cj.at("facet_a"));
    c.facet_d = side_from_json(cj.at("facet_d"));
    if (!cj.at("null_reason").is_null()) c.null_reason = cj.at("null_reason").get<std::string>();
    cell.confusion.push_back(std::move(c));
  }
  return cell;
}

}  // namespace

nlohmann::ordered_json report_to_json(const BiasReport& report) {
  ordered_json j;
  j["report_version"] = kReportVersion;
  j["kind"] = report.evaluation ? "evaluate" : "audit";
  j["run"] = {{"config_fingerprint", report.meta.config_fingerprint},
              {"seed", report.meta.seed},
              {"timestamp", report.meta.timestamp},
              {"tool_version", report.meta.tool_version}};
  j["dataset"] = {{"name", report.dataset.name},
                  {"csv", report.dataset.csv_path},
                  {"rows_read", report.dataset.ingest.rows_read},
                  {"rows_kept", report.dataset.ingest.rows_kept},
                  {"rows_rejected", report.dataset.ingest.rows_rejected},
                  {"bad_numeric_cells", report.dataset.ingest.bad_numeric_cells},
                  {"excluded_missing_label", report.dataset.excluded_missing_label},
                  {"unassigned_rows", report.dataset.unassigned_rows}};
  j["task"] = {{"label", report.task_label},
               {"classes", report.label_names},
               {"positive_class", report.positive_class}};
  ordered_json groups = ordered_json::array();
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    groups.push_back({{"name", report.groups[g]}, {"rows", report.group_sizes.at(g)}});
  }
  j["groups"] = std::move(groups);
  ordered_json facets = ordered_json::array();
  for (const auto& f : report.facets) facets.push_back(facet_to_json(f));
  j["facets"] = std::move(facets);
  j["thresholds"] = {{"ci_high", report.thresholds.ci_high},
                     {"kl_low", report.thresholds.kl_low},
                     {"ks_low", report.thresholds.ks_low}};
  ordered_json bias = ordered_json::array();
  for (const auto& cell : report.bias) bias.push_back(cell_to_json(cell, report.label_names));
  j["bias"] = std::move(bias);
  if (report.evaluation) {
    ordered_json ev;
    ev["f1_mode"] = report.f1_mode;
    ev["holdout_fraction"] = report.holdout_fraction;
    ev["groups"] = report.evaluation->groups;
    ordered_json cells = ordered_json::array();
    for (const auto& cell : report.evaluation->cells) cells.push_back(eval_cell_to_json(cell));
    ev["cells"] = std::move(cells);
    j["evaluation"] = std::move(ev);
  } else {
    j["evaluation"] = nullptr;
  }
  return j;
}

BiasReport report_from_json(const nlohmann::ordered_json& j) {
  if (j.value("report_version", -1) != kReportVersion) {
    throw DataError("unsupported report version");
  }
  BiasReport report;
  report.meta.config_fingerprint = j.at("run").at("config_fingerprint").get<std::string>();
  report.meta.seed = j.at("run").at("seed").get<std::uint64_t>();
  report.meta.timestamp = j.at("run").at("timestamp").get<std::string>();
  report.meta.tool_version = j.at("run").at("tool_version").get<std::string>();
  report.dataset.name = j.at("dataset").at("name").get<std::string>();
  report.dataset.csv_path = j.at("dataset").at("csv").get<std::string>();
  report.dataset.ingest.rows_read = j.at("dataset").at("rows_read").get<std::size_t>();
  report.dataset.ingest.rows_kept = j.at("dataset").at("rows_kept").get<std::size_t>();
  report.dataset.ingest.rows_rejected = j.at("dataset").at("rows_rejected").get<std::size_t>();
  report.dataset.ingest.bad_numeric_cells =
      j.at("dataset").at("bad_numeric_cells").get<std::size_t>();
  report.dataset.excluded_missing_label =
      j.at("dataset").at("excluded_missing_label").get<std::size_t>();
  report.dataset.unassigned_rows = j.at("dataset").at("unassigned_rows").get<std::size_t>();
  report.task_label = j.at("task").at("label").get<std::string>();
  report.label_names = j.at("task").at("classes").get<std::vector<std::string>>();
  report.positive_class = j.at("task").at("positive_class").get<std::string>();
  for (const auto& g : j.at("groups")) {
    report.groups.push_back(g.at("name").get<std::string>());
    report.group_sizes.push_back(g.at("rows").get<std::size_t>());
  }
  for (const auto& f : j.at("facets")) report.facets.push_back(facet_from_json(f));
  report.thresholds.ci_high = j.at("thresholds").at("ci_high").get<double>();
  report.thresholds.kl_low = j.at("thresholds").at("kl_low").get<double>();
  report.thresholds.ks_low = j.at("thresholds").at("ks_low").get<double>();
  for (const auto& c : j.at("bias")) {
    report.bias.push_back(cell_from_json(c, report.label_names));
  }
  if (!j.at("evaluation").is_null()) {
    const auto& ev = j.at("evaluation");
    EvalMatrix matrix;
    matrix.groups = ev.at("groups").get<std::vector<std::string>>();
    for (const auto& c : ev.at("cells")) matrix.cells.push_back(eval_cell_from_json(c));
    if (matrix.cells.size() != matrix.groups.size() * matrix.groups.size()) {
      throw DataError("report: evaluation matrix is not G x G");
    }
    report.f1_mode = ev.at("f1_mode").get<std::string>();
    report.holdout_fraction = ev.at("holdout_fraction").get<double>();
    report.evaluation = std::move(matrix);
  }
  return report;
}

void emit_report(const BiasReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write report file: " + path.string());
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw DataError("failed while writing report file: " + path.string());
}

BiasReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open report file: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("invalid report JSON in " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace biasaudit
