#include "biasaudit/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "biasaudit/errors.hpp"
#include "biasaudit/textutil.hpp"

namespace biasaudit {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError("config: " + what); }

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

std::string require_string(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    bad(where + " needs a string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

ColumnSchema parse_schema_entry(const ordered_json& j) {
  ColumnSchema col;
  col.name = require_string(j, "name", "schema entry");
  const std::string kind = get_or<std::string>(j, "kind", "categorical");
  auto parsed_kind = parse_column_kind(kind);
  if (!parsed_kind) bad("schema column '" + col.name + "': unknown kind '" + kind + "'");
  col.kind = *parsed_kind;
  const std::string role = get_or<std::string>(j, "role", "feature");
  auto parsed_role = parse_column_role(role);
  if (!parsed_role) bad("schema column '" + col.name + "': unknown role '" + role + "'");
  col.role = *parsed_role;
  col.missing_tokens = get_or<std::vector<std::string>>(j, "missing", {});
  col.index = get_or<int>(j, "index", -1);
  return col;
}

GroupKeyMap parse_grouping_groups(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "brazil-regions") return brazil_region_map();
    bad("grouping.groups: unknown preset '" + j.get<std::string>() + "'");
  }
  if (!j.is_array()) bad("grouping.groups must be an array or a preset name");
  GroupKeyMap map;
  for (const auto& g : j) {
    const std::string name = require_string(g, "name", "grouping group");
    if (!g.contains("keys") || !g.at("keys").is_array()) {
      bad("group '" + name + "' needs a 'keys' array");
    }
    map.groups.emplace_back(name, g.at("keys").get<std::vector<std::string>>());
  }
  return map;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }

  RunConfig cfg;
  if (!j.contains("config_version") || !j.at("config_version").is_number_integer()) {
    bad("missing integer field 'config_version'");
  }
  cfg.config_version = j.at("config_version").get<int>();
  if (cfg.config_version != kConfigVersion) {
    bad("unsupported config_version " + std::to_string(cfg.config_version) + " (expected " +
        std::to_string(kConfigVersion) + ")");
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      bad("'seed' must be a non-negative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  cfg.threads = get_or<int>(j, "threads", 1);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "out");
  cfg.geometry = get_or<std::string>(j, "geometry", "");
  cfg.geometry_name_property = get_or<std::string>(j, "geometry_name_property", "name");
  cfg.timestamp = get_or<std::string>(j, "timestamp", "");

  if (j.contains("csv")) {
    const auto& c = j.at("csv");
    const std::string delim = get_or<std::string>(c, "delimiter", ";");
    if (delim.size() != 1) bad("csv.delimiter must be a single character");
    cfg.csv.delimiter = delim[0];
    const std::string quote = get_or<std::string>(c, "quote", "\"");
    if (quote.size() != 1) bad("csv.quote must be a single character");
    cfg.csv.quote = quote[0];
    cfg.csv.header = get_or<bool>(c, "header", true);
    const std::string enc = get_or<std::string>(c, "encoding", "latin1");
    auto parsed = parse_encoding(enc);
    if (!parsed) bad("csv.encoding must be 'latin1' or 'utf8'");
    cfg.csv.encoding = *parsed;
  }

  if (!j.contains("schema") || !j.at("schema").is_array()) bad("missing 'schema' array");
  for (const auto& col : j.at("schema")) cfg.schema.push_back(parse_schema_entry(col));

  if (!j.contains("grouping")) bad("missing 'grouping' object");
  cfg.group_key_column = require_string(j.at("grouping"), "column", "grouping");
  if (!j.at("grouping").contains("groups")) bad("grouping needs 'groups'");
  cfg.grouping = parse_grouping_groups(j.at("grouping").at("groups"));

  if (!j.contains("facets") || !j.at("facets").is_array()) bad("missing 'facets' array");
  for (const auto& f : j.at("facets")) {
    FacetSpec spec;
    spec.attribute = require_string(f, "attribute", "facet");
    spec.advantaged = get_or<std::vector<std::string>>(f, "advantaged", {});
    spec.disadvantaged = get_or<std::vector<std::string>>(f, "disadvantaged", {});
    cfg.facets.push_back(std::move(spec));
  }

  if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty()) {
    bad("missing non-empty 'runs' array");
  }
  for (const auto& r : j.at("runs")) {
    DatasetRun run;
    run.name = require_string(r, "name", "run");
    run.csv = require_string(r, "csv", "run");
    if (!r.contains("task")) bad("run '" + run.name + "' needs a 'task' object");
    run.task.label = require_string(r.at("task"), "label", "run '" + run.name + "' task");
    run.task.positive_class =
        require_string(r.at("task"), "positive_class", "run '" + run.name + "' task");
    cfg.runs.push_back(std::move(run));
  }

  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    cfg.learner.n_estimators = get_or<int>(l, "n_estimators", 300);
    cfg.learner.max_depth = get_or<int>(l, "max_depth", -1);
    cfg.learner.min_samples_split = get_or<int>(l, "min_samples_split", 2);
    cfg.learner.features_per_split = get_or<int>(l, "features_per_split", 0);
    cfg.learner.include_protected_features =
        get_or<bool>(l, "include_protected_features", true);
  }

  if (j.contains("metrics")) {
    cfg.smoothing_epsilon = get_or<double>(j.at("metrics"), "smoothing_epsilon", 0.0);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    cfg.thresholds.ci_high = get_or<double>(t, "ci_high", 0.3);
    cfg.thresholds.kl_low = get_or<double>(t, "kl_low", 0.05);
    cfg.thresholds.ks_low = get_or<double>(t, "ks_low", 0.1);
  }
  if (j.contains("evaluation")) {
    cfg.holdout_fraction = get_or<double>(j.at("evaluation"), "holdout_fraction", 0.0);
  }
  if (j.contains("figure_ranges")) {
    for (const auto& [metric, range] : j.at("figure_ranges").items()) {
      if (!range.is_array() || range.size() != 2) {
        bad("figure_ranges." + metric + " must be [low, high]");
      }
      cfg.figure_ranges[metric] = {range[0].get<double>(), range[1].get<double>()};
    }
  }

  // Input paths are relative to the config file; outputs to the caller's cwd
  // unless absolute.
  const auto base = path.parent_path();
  for (auto& run : cfg.runs) run.csv = resolve(base, run.csv);
  cfg.geometry = resolve(base, cfg.geometry);

  cfg.learner.master_seed = cfg.seed;
  cfg.learner.threads = cfg.threads;
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (!cfg.seed_set) bad("'seed' is mandatory (reruns must be reproducible)");
  if (cfg.threads < 1) bad("'threads' must be >= 1");
  if (cfg.schema.empty()) bad("schema declares no columns");

  std::set<std::string> names;
  std::size_t group_keys = 0;
  for (const auto& col : cfg.schema) {
    if (col.name.empty()) bad("schema column with empty name");
    if (!names.insert(col.name).second) bad("duplicate schema column '" + col.name + "'");
    if (col.role == ColumnRole::group_key) ++group_keys;
  }
  if (group_keys != 1) {
    bad("exactly one column must have role=group_key (found " + std::to_string(group_keys) + ")");
  }

  auto find_col = [&](const std::string& name) -> const ColumnSchema* {
    for (const auto& col : cfg.schema) {
      if (col.name == name) return &col;
    }
    return nullptr;
  };

  const ColumnSchema* key_col = find_col(cfg.group_key_column);
  if (key_col == nullptr) bad("grouping column '" + cfg.group_key_column + "' not in schema");
  if (key_col->role != ColumnRole::group_key) {
    bad("grouping column '" + cfg.group_key_column + "' must have role=group_key");
  }
  if (key_col->kind == ColumnKind::numeric) {
    bad("grouping column '" + cfg.group_key_column + "' must be categorical");
  }

  if (cfg.grouping.groups.empty()) bad("grouping declares no groups");
  std::set<std::string> group_names, keys;
  for (const auto& [name, key_list] : cfg.grouping.groups) {
    if (!group_names.insert(name).second) bad("duplicate group name '" + name + "'");
    if (key_list.empty()) bad("group '" + name + "' has no key values");
    for (const auto& k : key_list) {
      if (!keys.insert(k).second) bad("key value '" + k + "' mapped to more than one group");
    }
  }

  if (cfg.facets.empty()) bad("at least one facet is required");
  for (const auto& facet : cfg.facets) {
    const ColumnSchema* col = find_col(facet.attribute);
    if (col == nullptr) bad("facet attribute '" + facet.attribute + "' not in schema");
    if (col->role != ColumnRole::protected_attr) {
      bad("facet attribute '" + facet.attribute + "' must have role=protected");
    }
    if (col->kind == ColumnKind::numeric) {
      bad("facet attribute '" + facet.attribute + "' must be categorical");
    }
    facet.validate();
  }

  for (const auto& run : cfg.runs) {
    if (run.name.empty()) bad("run with empty name");
    const ColumnSchema* label = find_col(run.task.label);
    if (label == nullptr) {
      bad("run '" + run.name + "': label column '" + run.task.label + "' not in schema");
    }
    if (label->role != ColumnRole::label) {
      bad("run '" + run.name + "': label column '" + run.task.label + "' must have role=label");
    }
    if (label->kind == ColumnKind::numeric) {
      bad("run '" + run.name + "': label column must be categorical or binary");
    }
  }
  {
    std::set<std::string> run_names;
    for (const auto& run : cfg.runs) {
      if (!run_names.insert(run.name).second) bad("duplicate run name '" + run.name + "'");
    }
  }

  if (cfg.learner.n_estimators < 1) bad("learner.n_estimators must be >= 1");
  if (cfg.learner.min_samples_split < 2) bad("learner.min_samples_split must be >= 2");
  if (cfg.smoothing_epsilon < 0) bad("metrics.smoothing_epsilon must be >= 0");
  if (cfg.thresholds.ci_high < 0 || cfg.thresholds.kl_low < 0 || cfg.thresholds.ks_low < 0) {
    bad("thresholds must be non-negative");
  }
  if (cfg.holdout_fraction < 0 || cfg.holdout_fraction >= 1) {
    bad("evaluation.holdout_fraction must be in [0, 1)");
  }
  for (const auto& [metric, range] : cfg.figure_ranges) {
    if (metric != "ci" && metric != "kl" && metric != "ks") {
      bad("figure_ranges: unknown metric '" + metric + "'");
    }
    if (!(range.second > range.first)) {
      bad("figure_ranges." + metric + ": high must exceed low");
    }
  }
}

std::string config_fingerprint(const RunConfig& cfg) {
  // Canonical form: plain nlohmann::json orders keys lexicographically.
  nlohmann::json j;
  j["config_version"] = cfg.config_version;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["geometry"] = cfg.geometry.string();
  j["geometry_name_property"] = cfg.geometry_name_property;
  j["csv"] = {{"delimiter", std::string(1, cfg.csv.delimiter)},
              {"quote", std::string(1, cfg.csv.quote)},
              {"header", cfg.csv.header},
              {"encoding", cfg.csv.encoding == Encoding::latin1 ? "latin1" : "utf8"}};
  for (const auto& col : cfg.schema) {
    j["schema"].push_back({{"name", col.name},
                           {"kind", std::string(to_string(col.kind))},
                           {"role", std::string(to_string(col.role))},
                           {"missing", col.missing_tokens},
                           {"index", col.index}});
  }
  j["grouping"]["column"] = cfg.group_key_column;
  for (const auto& [name, key_list] : cfg.grouping.groups) {
    j["grouping"]["groups"].push_back({{"name", name}, {"keys", key_list}});
  }
  for (const auto& facet : cfg.facets) {
    j["facets"].push_back({{"attribute", facet.attribute},
                           {"advantaged", facet.advantaged},
                           {"disadvantaged", facet.disadvantaged}});
  }
  for (const auto& run : cfg.runs) {
    j["runs"].push_back({{"name", run.name},
                         {"csv", run.csv.string()},
                         {"label", run.task.label},
                         {"positive_class", run.task.positive_class}});
  }
  j["learner"] = {{"n_estimators", cfg.learner.n_estimators},
                  {"max_depth", cfg.learner.max_depth},
                  {"min_samples_split", cfg.learner.min_samples_split},
                  {"features_per_split", cfg.learner.features_per_split},
                  {"include_protected_features", cfg.learner.include_protected_features}};
  j["smoothing_epsilon"] = cfg.smoothing_epsilon;
  j["thresholds"] = {{"ci_high", cfg.thresholds.ci_high},
                     {"kl_low", cfg.thresholds.kl_low},
                     {"ks_low", cfg.thresholds.ks_low}};
  j["holdout_fraction"] = cfg.holdout_fraction;
  for (const auto& [metric, range] : cfg.figure_ranges) {
    j["figure_ranges"][metric] = {range.first, range.second};
  }

  Fnv64 h;
  h.update(j.dump());
  return h.hex();
}

}  // namespace biasaudit
