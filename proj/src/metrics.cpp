#include "biasaudit/metrics.hpp"

#include <cmath>
#include <limits>

#include "biasaudit/errors.hpp"

namespace biasaudit {

double class_imbalance(const FacetCounts& counts) {
  const auto total = counts.n_a + counts.n_d;
  if (total == 0) throw FacetError("no facet members");
  return (static_cast<double>(counts.n_a) - static_cast<double>(counts.n_d)) /
         static_cast<double>(total);
}

double kl_divergence(const LabelDistribution& dist) {
  double sum = 0.0;
  for (std::size_t y = 0; y < dist.p_a.size(); ++y) {
    const double pa = dist.p_a[y];
    if (pa == 0.0) continue;  // 0 * log(0) := 0
    const double pd = dist.p_d[y];
    if (pd == 0.0) return std::numeric_limits<double>::infinity();
    sum += pa * std::log(pa / pd);
  }
  return sum;
}

KsResult ks_statistic(const LabelDistribution& dist) {
  KsResult best;
  best.label = dist.labels.empty() ? 0 : dist.labels.front();
  for (std::size_t y = 0; y < dist.p_a.size(); ++y) {
    const double diff = std::fabs(dist.p_a[y] - dist.p_d[y]);
    if (diff > best.value) {
      best.value = diff;
      best.label = dist.labels[y];
    }
  }
  return best;
}

std::vector<MetricCell> audit_group(const DataTable& table, std::string_view group,
                                    std::span<const std::size_t> rows,
                                    const std::vector<FacetSpec>& facets,
                                    std::span<const std::int32_t> labels,
                                    std::size_t n_classes,
                                    double smoothing_epsilon) {
  std::vector<MetricCell> cells;
  cells.reserve(facets.size());
  for (const auto& facet : facets) {
    MetricCell cell;
    cell.group = group;
    cell.attribute = facet.attribute;
    try {
      cell.counts = facet_counts(table, facet, rows);
      cell.ci = class_imbalance(cell.counts);
    } catch (const FacetError& e) {
      cell.counts = FacetCounts{0, 0, rows.size()};
      cell.null_reason = e.what();
      cells.push_back(std::move(cell));
      continue;
    }
    try {
      cell.distribution =
          label_distribution(table, facet, labels, rows, n_classes, smoothing_epsilon);
      cell.kl_nats = kl_divergence(*cell.distribution);
      auto ks = ks_statistic(*cell.distribution);
      cell.ks = ks.value;
      cell.ks_arg_label = ks.label;
    } catch (const FacetError& e) {
      // CI stays; KL/KS are undefined with one side empty.
      cell.null_reason = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace biasaudit
