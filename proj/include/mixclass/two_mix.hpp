#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mixclass/config.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/recovery.hpp"

namespace mixclass {

// Ordered response tuples of (v0, v) for the two components, entries in
// {-1, 0, +1}. Component 1 is fixed by the pivot convention (the component
// responding +1 to v0, or owning v0's zero in the all-zeros case).
struct AlignmentTuple {
  std::pair<int, int> beta1;
  std::pair<int, int> beta2;
  bool operator==(const AlignmentTuple& o) const { return beta1 == o.beta1 && beta2 == o.beta2; }
};

// ell = 2 support recovery without the separability assumption, from |S(i)|
// and pairwise intersections. Returns the two supports (ascending), identical
// when all |S(i)| lie in {0, 2}; otherwise component 1 owns the smallest
// coordinate with |S(i)| == 1.
std::pair<std::vector<int>, std::vector<int>> l2_support(CountSource& counts, int n, int k,
                                                         std::uint64_t seed,
                                                         const BudgetConfig& cfg = {});

// Same, against a caller-supplied RUFF battery (possibly alphabet-truncated;
// the simulation harness sweeps its row budget).
std::pair<std::vector<int>, std::vector<int>> l2_support(CountSource& counts,
                                                         const SetFamily& ruff, int k,
                                                         std::uint64_t seed,
                                                         const BudgetConfig& cfg = {});

// Case 1 (different supports): learns sign(beta1_p) at a symmetric-difference
// coordinate p, then decodes per round both components' Gaussian labels from a
// Type-1 (v + s*Inf*e_p) / Type-2 (v) query pair. `query_gen(0, round, coord)`
// overrides the Gaussian entries when supplied.
RecoveryResult l2_recover_diff_support(CountSource& counts, const MixtureInstance& truth,
                                       const std::vector<int>& supp1,
                                       const std::vector<int>& supp2, double epsilon,
                                       std::uint64_t seed, const BudgetConfig& cfg = {},
                                       const LabelQueryGen& query_gen = {});

// Averaging estimator over +/-1 queries (error carries the ||x||_inf penalty
// of sub-Gaussian 1-bit sensing; measured, not asserted).
SparseVector subgaussian_estimate(const LabeledQuerySet& lqs, int k);

// Response multiset of size 2 from the batched estimator.
CountEstimate classify_response_set(CountSource& counts, const VecRef& v, int T);

// Alignment of two queries that both have 0 in their response set: queries
// v0 + v once; a surviving zero means the zeros share a component.
AlignmentTuple align_zero_zero(CountSource& counts, const VecRef& v0, const VecRef& v, int T);

// Pivot with response {+1,-1} against v with a zero: queries v0 + Inf*v and
// reads off which pivot sign accompanies the zero.
AlignmentTuple align_pivot_zero(CountSource& counts, const VecRef& v0, const VecRef& v, int T,
                                double inf_value);

// Pivot and v both with response {+1,-1}, entries on the delta grid: sweeps
// positive rationals eta = c/d, |c|,|d| <= ceil(sqrt(k)/delta), querying
// c*v0 + d*v; any response other than {+1,-1} certifies anti-alignment.
AlignmentTuple align_pivot_pm(CountSource& counts, const VecRef& v0, const VecRef& v, int k,
                              double delta, int T);

// Number of distinct positive ratios the Case-3 sweep visits.
std::vector<std::pair<int, int>> case3_ratio_grid(int k, double delta);

// Case 2 (equal supports) and the Corollary-1 dense variant: +/-1 query
// rounds, singleton responses label both streams, two-response queries are
// aligned to a pivot, estimates via subgaussian_estimate.
RecoveryResult l2_recover_same_support(CountSource& counts, const MixtureInstance& truth,
                                       const std::vector<int>& support, double epsilon, int k,
                                       double delta, std::uint64_t seed,
                                       const BudgetConfig& cfg = {});

// Full ell = 2 pipeline: support recovery then the matching case branch.
// `dense` skips support recovery and uses the full coordinate set.
RecoveryResult l2_recover(CountSource& counts, const MixtureInstance& truth, int k,
                          double epsilon, double delta, std::uint64_t seed, bool dense = false,
                          const BudgetConfig& cfg = {});

}  // namespace mixclass
