#pragma once

#include <cstdint>

#include "mixclass/set_family.hpp"

namespace mixclass {

// Knobs shared by the recovery pipelines. Defaults match the documented
// design constants; harness configs may override any of them.
struct BudgetConfig {
  FamilyConstants family;       // C_d, C_m, C_c
  double c_g = 40.0;            // Gaussian label-count multiplier
  double batch_slack = 1.0;     // scales every default_batchsize result
  double failure_budget = 0.002;  // per-phase estimation failure budget
  int family_retries = 3;       // re-seeds after a construction failure
  std::uint64_t verify_cap = 50'000'000;

  // Modified-query magnitude policy: Gaussian entries are re-drawn into
  // [-max_query_magnitude, max_query_magnitude] and Inf is set to
  // inf_scale * max_query_magnitude * sqrt(k) / mu_min.
  double max_query_magnitude = 6.0;
  double inf_scale = 10.0;

  // When > 0, overrides the ceil(c_g * k/eps * ln(k/eps + e)) label count.
  int gaussian_labels_override = 0;
  // Same-support ell=2 path: number of +/-1 query rounds; when 0, derived as
  // ceil(c_s * k / eps^4 * ln(max(n,2))).
  int subgaussian_rounds_override = 0;
  double c_s = 1.0;

  // When true, union-size counts are evaluated only at the isolating rows the
  // algorithm actually reads (harness speed mode); by default every row of
  // the battery is estimated up front.
  bool lazy_union_counts = false;

  int gaussian_label_count(int k, double epsilon) const;
  int subgaussian_round_count(int n, int k, double epsilon) const;
  double inf_value(int k, double mu_min) const;
};

}  // namespace mixclass
