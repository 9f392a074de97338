#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/facets.hpp"
#include "biasaudit/forest.hpp"

namespace biasaudit {

// Fraction of exact matches. Throws DataError on empty input.
double accuracy(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels);

// Binary F1 for the declared positive class; 0 when precision+recall is 0.
double f1_score(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                std::int32_t positive_class);

// Unweighted mean of the per-class F1 over all declared classes.
double macro_f1(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                std::size_t n_classes);

struct FacetSideConfusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t n = 0;  // records on this facet side
  // Each raw count divided by n; the four rates sum to 1.
  double tp_rate = 0, fp_rate = 0, tn_rate = 0, fn_rate = 0;
};

struct ConfusionByFacet {
  std::string attribute;
  std::optional<FacetSideConfusion> facet_a;
  std::optional<FacetSideConfusion> facet_d;
  std::string null_reason;  // set when a side (or the whole facet) is empty
};

// Per-facet-side confusion for a binary task. preds/labels are aligned with
// `rows` (test-set row indices into `table`). Facet-excluded rows appear in
// no side.
ConfusionByFacet confusion_by_facet(std::span<const std::int32_t> preds,
                                    std::span<const std::int32_t> labels,
                                    const DataTable& table,
                                    std::span<const std::size_t> rows, const FacetSpec& facet,
                                    std::int32_t positive_class);

struct EvalCell {
  std::string train_group;
  std::string test_group;
  bool valid = false;
  std::string null_reason;
  std::uint64_t n_test = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::vector<ConfusionByFacet> confusion;  // one entry per facet
};

struct EvalMatrix {
  std::vector<std::string> groups;
  std::vector<EvalCell> cells;  // row-major: train_index * G + test_index

  const EvalCell& cell(std::size_t train, std::size_t test) const {
    return cells.at(train * groups.size() + test);
  }
};

struct CrossEvalOptions {
  std::int32_t positive_class = 1;  // class code; used when n_classes == 2
  std::size_t n_classes = 2;
};

// The G x G train/test grid. models[g] is empty for groups whose task was
// degenerate; their row and column become null cells. diag_rows, when given,
// replaces the diagonal test sets (holdout evaluation); off-diagonal cells
// always use the full test group.
EvalMatrix cross_evaluate(const std::vector<std::optional<ForestModel>>& models,
                          const GroupPartition& partition, const DataTable& features,
                          std::span<const std::int32_t> labels,
                          const std::vector<FacetSpec>& facets, const CrossEvalOptions& options,
                          const std::vector<std::vector<std::size_t>>* diag_rows = nullptr);

// Deterministic train/eval split of one group's rows.
struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
HoldoutSplit holdout_split(std::span<const std::size_t> rows, double fraction,
                           std::uint64_t seed);

}  // namespace biasaudit
