#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "biasaudit/config.hpp"
#include "biasaudit/errors.hpp"
#include "biasaudit/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> geometry;
  std::optional<int> threads;
  std::optional<std::string> delimiter;
  std::optional<std::string> encoding;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Override the master seed");
  cmd->add_option("-o,--output-dir", ov.output_dir,
                  "Override the output directory (also: BIASAUDIT_OUTPUT_DIR)");
  cmd->add_option("--geometry", ov.geometry, "Override the geometry (GeoJSON) path");
  cmd->add_option("--threads", ov.threads, "Override the worker count");
  cmd->add_option("--delimiter", ov.delimiter, "Override the CSV delimiter (one character)");
  cmd->add_option("--encoding", ov.encoding, "Override the CSV encoding (latin1 or utf8)");
}

biasaudit::RunConfig load_with_overrides(const std::string& config_path, const Overrides& ov) {
  auto cfg = biasaudit::load_config(config_path);
  // Precedence: flag > environment > config file.
  if (const char* env = std::getenv("BIASAUDIT_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    cfg.output_dir = env;
  }
  if (ov.output_dir) cfg.output_dir = *ov.output_dir;
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.seed_set = true;
    cfg.learner.master_seed = *ov.seed;
  }
  if (ov.geometry) cfg.geometry = *ov.geometry;
  if (ov.threads) {
    cfg.threads = *ov.threads;
    cfg.learner.threads = *ov.threads;
  }
  if (ov.delimiter) {
    if (ov.delimiter->size() != 1) {
      throw biasaudit::ConfigError("--delimiter must be a single character");
    }
    cfg.csv.delimiter = (*ov.delimiter)[0];
  }
  if (ov.encoding) {
    auto enc = biasaudit::parse_encoding(*ov.encoding);
    if (!enc) throw biasaudit::ConfigError("--encoding must be 'latin1' or 'utf8'");
    cfg.csv.encoding = *enc;
  }
  return cfg;
}

void print_artifacts(const biasaudit::PipelineResult& result) {
  for (const auto& run : result.runs) {
    std::cout << "run " << run.run_name << ": report " << run.report_path.string();
    if (!run.models.empty()) std::cout << ", " << run.models.size() << " model(s)";
    if (!run.figures.empty()) std::cout << ", " << run.figures.size() << " figure(s)";
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("biasaudit ") + biasaudit::kToolVersion +
               " - pre-training bias audit and cross-group evaluation for tabular datasets\n"
               "Config schema version: " +
               std::to_string(biasaudit::kConfigVersion)};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;

  auto* validate = app.add_subcommand("validate", "Check a config file and exit");
  validate->add_option("-c,--config", config_path, "Config file (JSON)")->required();

  auto* audit = app.add_subcommand(
      "audit", "Compute pre-training bias metrics and choropleths (no training)");
  audit->add_option("-c,--config", config_path, "Config file (JSON)")->required();
  add_override_flags(audit, ov);

  auto* evaluate = app.add_subcommand(
      "evaluate", "Train per-group forests, run the cross-group matrix, emit everything");
  evaluate->add_option("-c,--config", config_path, "Config file (JSON)")->required();
  add_override_flags(evaluate, ov);

  auto* render = app.add_subcommand("report", "Re-render figures from a saved report");
  render->add_option("-c,--config", config_path, "Config file (JSON)")->required();
  add_override_flags(render, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      auto cfg = biasaudit::load_config(config_path);
      biasaudit::validate_config(cfg);
      for (const auto& run : cfg.runs) {
        if (!std::filesystem::exists(run.csv)) {
          throw biasaudit::ConfigError("run '" + run.name + "': CSV not found: " +
                                       run.csv.string());
        }
      }
      if (!cfg.geometry.empty() && !std::filesystem::exists(cfg.geometry)) {
        throw biasaudit::ConfigError("geometry file not found: " + cfg.geometry.string());
      }
      std::cout << "config OK (version " << cfg.config_version << ", " << cfg.runs.size()
                << " run(s), " << cfg.facets.size() << " facet(s))\n";
      return biasaudit::exit_code::ok;
    }
    if (audit->parsed()) {
      print_artifacts(biasaudit::cmd_audit(load_with_overrides(config_path, ov)));
      return biasaudit::exit_code::ok;
    }
    if (evaluate->parsed()) {
      print_artifacts(biasaudit::cmd_evaluate(load_with_overrides(config_path, ov)));
      return biasaudit::exit_code::ok;
    }
    if (render->parsed()) {
      print_artifacts(biasaudit::cmd_render(load_with_overrides(config_path, ov)));
      return biasaudit::exit_code::ok;
    }
  } catch (const biasaudit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return biasaudit::exit_code::config;
  } catch (const biasaudit::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return biasaudit::exit_code::geometry;
  } catch (const biasaudit::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return biasaudit::exit_code::data;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return biasaudit::exit_code::internal;
  }
  return biasaudit::exit_code::internal;
}
