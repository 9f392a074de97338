#include "biasaudit/facets.hpp"

#include <algorithm>
#include <numeric>

#include "biasaudit/errors.hpp"

namespace biasaudit {

void FacetSpec::validate() const {
  if (attribute.empty()) throw ConfigError("facet attribute name is empty");
  if (advantaged.empty() || disadvantaged.empty()) {
    throw ConfigError("facet '" + attribute + "': both value sets must be non-empty");
  }
  for (const auto& v : advantaged) {
    if (std::find(disadvantaged.begin(), disadvantaged.end(), v) != disadvantaged.end()) {
      throw ConfigError("facet '" + attribute + "': value '" + v +
                        "' appears in both advantaged and disadvantaged sets");
    }
  }
}

FacetIndex::FacetIndex(const DataTable& table, const FacetSpec& spec) {
  spec.validate();
  col_ = table.find_column(spec.attribute);
  if (col_ == nullptr) {
    throw DataError("facet attribute column '" + spec.attribute + "' not found");
  }
  if (col_->is_numeric()) {
    throw DataError("facet attribute column '" + spec.attribute + "' must be categorical");
  }
  side_of_code_.assign(col_->dict.size(), FacetSide::none);
  auto mark = [&](const std::vector<std::string>& values, FacetSide side) {
    for (const auto& v : values) {
      if (v == kMissingCategory) continue;  // missing never counts as a member
      if (auto code = col_->dict.find(v)) {
        side_of_code_[static_cast<std::size_t>(*code)] = side;
      }
    }
  };
  mark(spec.advantaged, FacetSide::a);
  mark(spec.disadvantaged, FacetSide::d);
}

namespace {

FacetCounts count_rows(const FacetIndex& index, std::span<const std::size_t> rows) {
  FacetCounts counts;
  for (auto r : rows) {
    switch (index.side(r)) {
      case FacetSide::a: ++counts.n_a; break;
      case FacetSide::d: ++counts.n_d; break;
      case FacetSide::none: ++counts.n_excluded; break;
    }
  }
  return counts;
}

std::vector<std::size_t> all_rows(const DataTable& table) {
  std::vector<std::size_t> rows(table.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

FacetCounts facet_counts(const DataTable& table, const FacetSpec& facet,
                         std::span<const std::size_t> rows) {
  FacetIndex index(table, facet);
  FacetCounts counts = count_rows(index, rows);
  if (counts.n_a + counts.n_d == 0) {
    throw FacetError("no facet members for attribute '" + facet.attribute + "'");
  }
  return counts;
}

FacetCounts facet_counts(const DataTable& table, const FacetSpec& facet) {
  auto rows = all_rows(table);
  return facet_counts(table, facet, rows);
}

LabelDistribution label_distribution(const DataTable& table, const FacetSpec& facet,
                                     std::span<const std::int32_t> labels,
                                     std::span<const std::size_t> rows,
                                     std::size_t n_classes,
                                     double smoothing_epsilon) {
  if (labels.size() != table.n_rows()) {
    throw DataError("label vector length does not match table rows");
  }
  if (n_classes == 0) throw DataError("label dictionary is empty");

  FacetIndex index(table, facet);
  std::vector<std::size_t> count_a(n_classes, 0), count_d(n_classes, 0);
  std::size_t n_a = 0, n_d = 0;
  for (auto r : rows) {
    auto y = static_cast<std::size_t>(labels[r]);
    switch (index.side(r)) {
      case FacetSide::a:
        ++count_a[y];
        ++n_a;
        break;
      case FacetSide::d:
        ++count_d[y];
        ++n_d;
        break;
      case FacetSide::none: break;
    }
  }
  if (n_a == 0 || n_d == 0) {
    throw FacetError("no facet members in facet " + std::string(n_a == 0 ? "a" : "d") +
                     " for attribute '" + facet.attribute + "'");
  }

  LabelDistribution dist;
  dist.labels.resize(n_classes);
  std::iota(dist.labels.begin(), dist.labels.end(), 0);
  dist.p_a.resize(n_classes);
  dist.p_d.resize(n_classes);
  const double eps = smoothing_epsilon;
  const double denom_a = static_cast<double>(n_a) + eps * static_cast<double>(n_classes);
  const double denom_d = static_cast<double>(n_d) + eps * static_cast<double>(n_classes);
  for (std::size_t y = 0; y < n_classes; ++y) {
    dist.p_a[y] = (static_cast<double>(count_a[y]) + eps) / denom_a;
    dist.p_d[y] = (static_cast<double>(count_d[y]) + eps) / denom_d;
  }
  return dist;
}

LabelDistribution label_distribution(const DataTable& table, const FacetSpec& facet,
                                     std::span<const std::int32_t> labels,
                                     std::size_t n_classes,
                                     double smoothing_epsilon) {
  auto rows = all_rows(table);
  return label_distribution(table, facet, labels, rows, n_classes, smoothing_epsilon);
}

}  // namespace biasaudit
