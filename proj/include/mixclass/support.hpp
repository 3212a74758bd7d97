#pragma once

#include <cstdint>
#include <vector>

#include "mixclass/config.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/set_family.hpp"
#include "mixclass/types.hpp"

namespace mixclass {

// Recovered n x ell binary support matrix; column order is canonical
// (ascending representative coordinate). rep[t] is the smallest coordinate
// owned solely by column t, -1 when none exists.
struct SupportMatrix {
  IntMat x;               // n x ell
  std::vector<int> reps;  // size ell
};

// n x n Gram matrix Z = X X^T assembled by inclusion-exclusion.
struct GramMatrix {
  IntMat z;
};

// Per-coordinate |S(i)| from the RUFF battery. The threshold compares the
// overlap of supp(b^h) with each column against half that column's size, so
// alphabet-truncated batteries degrade gracefully (empty column -> 0).
IntVec compute_s_sizes(CountSource& counts, const SetFamily& ruff, int T);

// All |S(i) union S(j)| from the PUFF battery of ell+1 value matrices with a
// shared support pattern and fresh Uniform(0,1) entries. Throws
// ConstructionFailure when no isolating row exists for some pair in U x U.
IntMat compute_union_sizes(CountSource& counts, const IntVec& s_sizes, const SetFamily& puff,
                           int T, std::uint64_t value_seed, bool lazy = false);

// Z[i][j] = |S(i)| + |S(j)| - |S(i) union S(j)|; throws InconsistencyError on
// a negative entry.
GramMatrix build_gram(const IntVec& s_sizes, const IntMat& union_sizes);

// Constrained binary rank factorization of Z under the separability
// assumption: singleton rows (Z[i][i] == 1) are clustered by the relation
// Z[i][j] == 1, memberships are read off against cluster representatives, and
// X X^T == Z is validated exactly.
SupportMatrix factorize_support(const GramMatrix& z, int ell);

// Full support-recovery pipeline: RUFF |S(i)| stage, PUFF union stage, Gram
// assembly, factorization. Family seeds derive from `seed`; construction
// failures trigger up to cfg.family_retries re-seeds of the affected family.
SupportMatrix recover_support(CountSource& counts, int n, int k, int ell, std::uint64_t seed,
                              const BudgetConfig& cfg = {});

// Same pipeline, also handing back the RUFF battery so the sign-recovery
// stage can reuse its rows.
struct SupportRecovery {
  SupportMatrix x;
  SetFamily ruff;
};
SupportRecovery recover_support_full(CountSource& counts, int n, int k, int ell,
                                     std::uint64_t seed, const BudgetConfig& cfg = {});

// Signs of the representative coordinates via isolating RUFF rows.
std::vector<int> recover_rep_signs(CountSource& counts, const SupportMatrix& x,
                                   const SetFamily& ruff, int T);

// Representative coordinate per column (-1 when a column has none).
std::vector<int> representative_coordinates(const IntMat& x);

// Canonical form: columns sorted by representative coordinate. Used to compare
// support matrices up to column permutation.
IntMat canonical_columns(const IntMat& x);

}  // namespace mixclass
