#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mixclass/config.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/support.hpp"

namespace mixclass {

// One component's worth of 1-bit measurements: query vectors, their {-1,+1}
// labels, and the coordinate set estimation is restricted to.
struct LabeledQuerySet {
  std::vector<Vec> queries;
  std::vector<int> labels;
  std::vector<int> target_support;
};

struct RecoveryResult {
  std::vector<SparseVector> estimates;  // unit norm, one per component
  std::vector<int> matching;            // sigma: truth index -> estimate index
  std::vector<double> errors;           // per truth component, after matching
  double max_error = 0.0;
  QueryLedger queries_used;
  std::vector<std::vector<int>> label_streams;  // decoded labels per component
};

// Averaging estimator: aggregate y_i * v_i over the target support, hard
// threshold to the k largest magnitudes, normalize.
SparseVector onebit_estimate(const LabeledQuerySet& lqs, int k);

// Deterministic per-(component, round, coordinate) Gaussian source for the
// modified queries; lets the one-stage and two-stage paths share label
// randomness exactly when handed the same generator.
using LabelQueryGen = std::function<double(int t, int round, int coord)>;

struct TwoStageOptions {
  BudgetConfig budget;
  LabelQueryGen query_gen;  // defaults to a seed-derived generator
};

// Two-stage pipeline: support + rep signs, then per component modified
// Gaussian queries with Inf planted at the other components' representative
// coordinates; labels decoded from poscount vs the expected positive count.
RecoveryResult two_stage_recover(CountSource& counts, const MixtureInstance& truth, int k,
                                 double epsilon, std::uint64_t seed,
                                 const TwoStageOptions& opts = {});

// Fully non-adaptive single-stage pipeline: the whole query plan (RUFF battery,
// PUFF battery, D CFF-with-Gaussian blocks) is fixed before the first oracle
// call; per-component labels are read from an isolating CFF row in each block.
struct OneStageResult {
  RecoveryResult result;
  SetFamily cff;                 // the (ell, ell*k)-CFF used for the blocks
  std::vector<int> label_rows;   // isolating row per component
  std::uint64_t block_seed = 0;  // base seed of the block Gaussian entries
};

OneStageResult one_stage_recover(CountSource& counts, const MixtureInstance& truth, int k,
                                 double epsilon, std::uint64_t seed,
                                 const BudgetConfig& cfg = {});

// Gaussian entry used by one-stage block `round` at (row, coord); exposed so a
// two-stage run can replay the exact same label queries.
double one_stage_block_entry(std::uint64_t block_seed, int round, int row, int coord,
                             double magnitude_bound);

struct MatchResult {
  std::vector<int> sigma;       // truth index -> estimate index
  std::vector<double> errors;   // per truth component
  double max_error = 0.0;
};

// Minimizes the maximum normalized l2 distance over all permutations
// (ell <= 8); ties break toward the lexicographically smallest sigma.
MatchResult match_and_error(const std::vector<SparseVector>& estimates,
                            const std::vector<SparseVector>& truth);

}  // namespace mixclass
