#include "biasaudit/evaluation.hpp"

#include <algorithm>

#include "biasaudit/errors.hpp"
#include "biasaudit/rng.hpp"

namespace biasaudit {

double accuracy(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels) {
  if (preds.size() != labels.size()) throw DataError("prediction/label length mismatch");
  if (preds.empty()) throw DataError("accuracy of empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

namespace {

double f1_one_class(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                    std::int32_t positive) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool pred_pos = preds[i] == positive;
    const bool is_pos = labels[i] == positive;
    if (pred_pos && is_pos) ++tp;
    else if (pred_pos && !is_pos) ++fp;
    else if (!pred_pos && is_pos) ++fn;
  }
  const double precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1_score(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                std::int32_t positive_class) {
  if (preds.size() != labels.size()) throw DataError("prediction/label length mismatch");
  if (preds.empty()) throw DataError("f1 of empty input");
  return f1_one_class(preds, labels, positive_class);
}

double macro_f1(std::span<const std::int32_t> preds, std::span<const std::int32_t> labels,
                std::size_t n_classes) {
  if (preds.size() != labels.size()) throw DataError("prediction/label length mismatch");
  if (preds.empty()) throw DataError("f1 of empty input");
  if (n_classes == 0) throw DataError("macro f1 needs at least one class");
  double sum = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    sum += f1_one_class(preds, labels, static_cast<std::int32_t>(c));
  }
  return sum / static_cast<double>(n_classes);
}

ConfusionByFacet confusion_by_facet(std::span<const std::int32_t> preds,
                                    std::span<const std::int32_t> labels,
                                    const DataTable& table,
                                    std::span<const std::size_t> rows, const FacetSpec& facet,
                                    std::int32_t positive_class) {
  if (preds.size() != rows.size() || labels.size() != rows.size()) {
    throw DataError("confusion_by_facet: preds/labels must align with the row subset");
  }
  ConfusionByFacet out;
  out.attribute = facet.attribute;

  FacetIndex index(table, facet);
  FacetSideConfusion a, d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    FacetSideConfusion* side = nullptr;
    switch (index.side(rows[i])) {
      case FacetSide::a: side = &a; break;
      case FacetSide::d: side = &d; break;
      case FacetSide::none: continue;  // unknown membership: no side
    }
    const bool pred_pos = preds[i] == positive_class;
    const bool is_pos = labels[i] == positive_class;
    if (pred_pos && is_pos) ++side->tp;
    else if (pred_pos && !is_pos) ++side->fp;
    else if (!pred_pos && !is_pos) ++side->tn;
    else ++side->fn;
    ++side->n;
  }

  auto finalize = [](FacetSideConfusion& s) {
    const auto n = static_cast<double>(s.n);
    s.tp_rate = static_cast<double>(s.tp) / n;
    s.fp_rate = static_cast<double>(s.fp) / n;
    s.tn_rate = static_cast<double>(s.tn) / n;
    s.fn_rate = static_cast<double>(s.fn) / n;
  };
  if (a.n == 0 && d.n == 0) {
    out.null_reason = "no facet members in test set";
  } else if (a.n == 0) {
    out.null_reason = "facet a empty in test set";
    finalize(d);
    out.facet_d = d;
  } else if (d.n == 0) {
    out.null_reason = "facet d empty in test set";
    finalize(a);
    out.facet_a = a;
  } else {
    finalize(a);
    finalize(d);
    out.facet_a = a;
    out.facet_d = d;
  }
  return out;
}

HoldoutSplit holdout_split(std::span<const std::size_t> rows, double fraction,
                           std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ConfigError("holdout fraction must be in [0, 1)");
  }
  HoldoutSplit split;
  if (fraction == 0.0 || rows.size() < 2) {
    split.train.assign(rows.begin(), rows.end());
    split.eval.assign(rows.begin(), rows.end());  // paper-style diagonal: test on itself
    return split;
  }
  std::vector<std::size_t> shuffled(rows.begin(), rows.end());
  Rng rng(seed);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    const auto j = rng.next_below(i + 1);
    std::swap(shuffled[i], shuffled[j]);
  }
  auto n_eval = static_cast<std::size_t>(fraction * static_cast<double>(shuffled.size()));
  n_eval = std::clamp<std::size_t>(n_eval, 1, shuffled.size() - 1);
  split.eval.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_eval));
  split.train.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_eval), shuffled.end());
  // Row order within each part follows the original order for reproducible
  // downstream scans.
  std::sort(split.eval.begin(), split.eval.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

EvalMatrix cross_evaluate(const std::vector<std::optional<ForestModel>>& models,
                          const GroupPartition& partition, const DataTable& features,
                          std::span<const std::int32_t> labels,
                          const std::vector<FacetSpec>& facets, const CrossEvalOptions& options,
                          const std::vector<std::vector<std::size_t>>* diag_rows) {
  const std::size_t n_groups = partition.group_names.size();
  if (models.size() != n_groups) {
    throw DataError("cross_evaluate: need one model slot per group");
  }
  if (labels.size() != features.n_rows()) {
    throw DataError("label vector length does not match table rows");
  }

  EvalMatrix matrix;
  matrix.groups = partition.group_names;
  matrix.cells.resize(n_groups * n_groups);

  // Test rows and their labels, gathered once per test group.
  std::vector<std::vector<std::size_t>> test_rows(n_groups);
  std::vector<std::vector<std::int32_t>> test_labels(n_groups);
  std::vector<DataTable> test_tables(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    test_rows[g] = partition.rows_of(g);
    test_labels[g].reserve(test_rows[g].size());
    for (auto r : test_rows[g]) test_labels[g].push_back(labels[r]);
    test_tables[g] = features.select_rows(test_rows[g]);
  }
  std::vector<std::vector<std::size_t>> diag_tables_rows(n_groups);
  std::vector<DataTable> diag_tables(n_groups);
  std::vector<std::vector<std::int32_t>> diag_labels(n_groups);
  const bool have_diag = diag_rows != nullptr;
  if (have_diag) {
    for (std::size_t g = 0; g < n_groups; ++g) {
      diag_tables_rows[g] = (*diag_rows)[g];
      diag_labels[g].reserve(diag_tables_rows[g].size());
      for (auto r : diag_tables_rows[g]) diag_labels[g].push_back(labels[r]);
      diag_tables[g] = features.select_rows(diag_tables_rows[g]);
    }
  }

  for (std::size_t ti = 0; ti < n_groups; ++ti) {
    for (std::size_t si = 0; si < n_groups; ++si) {
      EvalCell& cell = matrix.cells[ti * n_groups + si];
      cell.train_group = partition.group_names[ti];
      cell.test_group = partition.group_names[si];

      if (!models[ti].has_value()) {
        cell.null_reason = "no model for train group '" + cell.train_group + "'";
        continue;
      }
      if (!models[si].has_value()) {
        // A group whose own task is degenerate is excluded as a test set too,
        // so its row and column stay null together.
        cell.null_reason = "test group '" + cell.test_group + "' excluded (no model)";
        continue;
      }

      const bool diagonal = ti == si && have_diag;
      const DataTable& tbl = diagonal ? diag_tables[si] : test_tables[si];
      const auto& rows = diagonal ? diag_tables_rows[si] : test_rows[si];
      const auto& lbls = diagonal ? diag_labels[si] : test_labels[si];
      if (rows.empty()) {
        cell.null_reason = "test group '" + cell.test_group + "' is empty";
        continue;
      }

      const auto preds = predict(*models[ti], tbl);
      cell.n_test = rows.size();
      cell.accuracy = accuracy(preds, lbls);
      cell.f1 = options.n_classes == 2 ? f1_score(preds, lbls, options.positive_class)
                                       : macro_f1(preds, lbls, options.n_classes);
      for (const auto& facet : facets) {
        if (options.n_classes != 2) {
          ConfusionByFacet skip;
          skip.attribute = facet.attribute;
          skip.null_reason = "per-facet confusion requires a binary task";
          cell.confusion.push_back(std::move(skip));
          continue;
        }
        // Facet membership is looked up on the full table via original row
        // ids so excluded rows stay excluded.
        cell.confusion.push_back(
            confusion_by_facet(preds, lbls, features, rows, facet, options.positive_class));
      }
      cell.valid = true;
    }
  }
  return matrix;
}

}  // namespace biasaudit
