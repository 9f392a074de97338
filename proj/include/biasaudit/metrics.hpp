#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasaudit/facets.hpp"

namespace biasaudit {

// Class Imbalance: (n_a - n_d) / (n_a + n_d), in [-1, 1]. Positive values
// mean facet a has more representation. Throws FacetError on an empty
// denominator.
double class_imbalance(const FacetCounts& counts);

// KL(P_a || P_d) in nats. Terms with p_a = 0 contribute nothing; a label
// with p_a > 0 and p_d = 0 makes the divergence +infinity (no silent
// smoothing — apply smoothing when building the distribution if wanted).
double kl_divergence(const LabelDistribution& dist);

struct KsResult {
  double value = 0.0;
  std::int32_t label = 0;  // class code attaining the maximum; ties -> first
};

// Kolmogorov-Smirnov: max over labels of |p_a(y) - p_d(y)|, in [0, 1].
KsResult ks_statistic(const LabelDistribution& dist);

// One group x facet audit cell. CI can be present while KL/KS are not (one
// empty facet side still has a well-defined imbalance of +-1); null_reason
// explains whatever is absent.
struct MetricCell {
  std::string group;
  std::string attribute;
  FacetCounts counts{};
  std::optional<double> ci;
  std::optional<double> kl_nats;  // +infinity encodes the divergent case
  std::optional<double> ks;
  std::optional<std::int32_t> ks_arg_label;
  std::optional<LabelDistribution> distribution;
  std::string null_reason;
  bool disagreement = false;
};

// Metrics for every facet over one group's rows. Facet failures become null
// cells with a reason; they never abort the audit.
std::vector<MetricCell> audit_group(const DataTable& table, std::string_view group,
                                    std::span<const std::size_t> rows,
                                    const std::vector<FacetSpec>& facets,
                                    std::span<const std::int32_t> labels,
                                    std::size_t n_classes,
                                    double smoothing_epsilon = 0.0);

}  // namespace biasaudit
