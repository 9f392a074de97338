#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/table.hpp"

namespace biasaudit {

// A protected-attribute facet pair: value sets for the advantaged (a) and
// disadvantaged (d) demographics. Sets, not single values, so a multi-valued
// attribute can be collapsed ("white" vs everything else) without rewriting
// the data.
struct FacetSpec {
  std::string attribute;
  std::vector<std::string> advantaged;
  std::vector<std::string> disadvantaged;

  void validate() const;  // throws ConfigError: empty sets or overlap
};

struct FacetCounts {
  std::size_t n_a = 0;
  std::size_t n_d = 0;
  std::size_t n_excluded = 0;  // rows in neither set, including missing
};

enum class FacetSide : std::int8_t { none = 0, a = 1, d = 2 };

// Resolves a facet's value sets against one column's dictionary so that row
// membership is a single array lookup.
class FacetIndex {
 public:
  FacetIndex(const DataTable& table, const FacetSpec& spec);
  FacetSide side(std::size_t row) const {
    return side_of_code_[static_cast<std::size_t>(col_->codes[row])];
  }

 private:
  const Column* col_;
  std::vector<FacetSide> side_of_code_;
};

// Membership counts over the given rows. Throws FacetError when no row
// belongs to either facet. Missing attribute values count as excluded.
FacetCounts facet_counts(const DataTable& table, const FacetSpec& facet,
                         std::span<const std::size_t> rows);
FacetCounts facet_counts(const DataTable& table, const FacetSpec& facet);

struct LabelDistribution {
  std::vector<std::int32_t> labels;  // class codes in dictionary order
  std::vector<double> p_a;
  std::vector<double> p_d;
};

// Facet-conditional label distributions P_a(y) and P_d(y). `labels` is
// aligned with the table rows; `rows` selects the group. Throws FacetError
// when either facet side is empty. With smoothing_epsilon > 0, epsilon is
// added to every label count before normalizing.
LabelDistribution label_distribution(const DataTable& table, const FacetSpec& facet,
                                     std::span<const std::int32_t> labels,
                                     std::span<const std::size_t> rows,
                                     std::size_t n_classes,
                                     double smoothing_epsilon = 0.0);
LabelDistribution label_distribution(const DataTable& table, const FacetSpec& facet,
                                     std::span<const std::int32_t> labels,
                                     std::size_t n_classes,
                                     double smoothing_epsilon = 0.0);

}  // namespace biasaudit
