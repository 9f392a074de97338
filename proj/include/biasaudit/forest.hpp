#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/table.hpp"

namespace biasaudit {

// Gini impurity 1 - sum(p_k^2) of a class-count vector. Throws DataError on a
// zero total.
double gini_impurity(std::span<const std::uint64_t> class_counts);

struct ForestConfig {
  int n_estimators = 300;
  int max_depth = -1;          // < 0: unlimited
  int min_samples_split = 2;
  int features_per_split = 0;  // 0: floor(sqrt(#features)), at least 1
  std::uint64_t master_seed = 0;
  int threads = 1;
  bool include_protected_features = true;
};

struct TreeNode {
  enum Kind : std::uint8_t { leaf = 0, numeric_split = 1, categorical_split = 2 };
  Kind kind = leaf;
  std::int32_t feature = -1;    // index into ForestModel::features
  double threshold = 0.0;       // numeric: go left iff value <= threshold
  std::int32_t category = -1;   // categorical: go left iff code == category
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t predicted = -1;          // leaf: argmax of counts, ties -> lowest code
  std::vector<std::uint32_t> counts;    // leaf class counts (bootstrap multiset)
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder, root at 0
};

struct ModelFeature {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> dict;  // categorical: code -> value
  double impute = 0.0;            // numeric: training-set median for missing cells
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<ModelFeature> features;
  std::vector<std::string> label_names;
  std::string group;
  std::string task;
  std::uint64_t master_seed = 0;
  int n_estimators = 0;
  int max_depth = -1;
  int min_samples_split = 2;
  int features_per_split = 0;  // resolved value actually used
  int n_classes = 0;
  std::uint64_t n_train_rows = 0;
  std::string schema_fingerprint;  // over feature names, kinds, dictionaries
};

struct TrainInfo {
  std::string group;
  std::string task;
  std::vector<std::string> label_names;
};

// Fingerprint of the named columns (name, kind, dictionary contents) as seen
// by a model; any inference table must hash identically.
std::string schema_fingerprint(const DataTable& table,
                               const std::vector<std::string>& feature_names);

// Columns a forest may split on: role=feature, plus role=protected when
// include_protected is set. Never the group key or a label.
std::vector<std::size_t> trainable_columns(const DataTable& table, bool include_protected);

// Bagged, Gini-split decision trees. labels[i] pairs with table row i and
// holds class codes in [0, n_classes). Deterministic for a fixed
// (table, labels, config) regardless of config.threads.
ForestModel train_forest(const DataTable& features, std::span<const std::int32_t> labels,
                         std::size_t n_classes, const ForestConfig& config,
                         const TrainInfo& info = {});

// Majority vote over all trees; ties resolve to the lowest class code.
// Throws DataError when the table's schema fingerprint differs.
std::vector<std::int32_t> predict(const ForestModel& model, const DataTable& table);

// The bootstrap draw for one tree, reproducible from the seeds alone.
std::vector<std::size_t> bootstrap_indices(std::uint64_t master_seed, int tree_index,
                                           std::size_t n_rows);

// Out-of-bag accuracy on the training table (regenerates each tree's bag
// from the stored seed). Rows that are in-bag for every tree are skipped.
double oob_accuracy(const ForestModel& model, const DataTable& features,
                    std::span<const std::int32_t> labels);

// Versioned line-oriented model file; load reproduces bit-identical
// predictions.
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

}  // namespace biasaudit
