#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixclass/types.hpp"

namespace mixclass {

enum class FamilyKind { Ruff, Cff };

// n subsets of the alphabet [0, m). Kind parameters record the design targets
// (RUFF: set size d, t, alpha; CFF: r, t); the combinatorial property itself
// is probabilistic and certified only by the verify_* routines.
struct SetFamily {
  int n = 0;
  int m = 0;
  FamilyKind kind = FamilyKind::Ruff;
  int d = 0;        // RUFF design set size
  int t = 0;        // both kinds
  double alpha = 0; // RUFF
  int r = 0;        // CFF
  std::vector<std::vector<int>> sets;  // each sorted ascending, deduplicated

  bool contains(int set_index, int element) const;
};

struct FamilyConstants {
  double c_d = 8.0;   // RUFF set size multiplier
  double c_m = 24.0;  // RUFF alphabet multiplier
  double c_c = 13.0;  // CFF alphabet multiplier
};

// Random (d,t,alpha)-RUFF draw: d = ceil(c_d * t * ln(max(n,2)) / alpha),
// m = ceil(c_m * t^2 * ln(max(n,2)) / alpha^2), each set a uniform d-subset.
SetFamily construct_ruff(int n, int t, double alpha, std::uint64_t seed,
                         const FamilyConstants& consts = {});

// Random (r,t)-CFF draw over m = ceil(c_c * t^(r+1) * ln(max(n,2))): membership
// i.i.d. Bernoulli(1/(t+1)). Requires n >= r + t.
SetFamily construct_cff(int n, int r, int t, std::uint64_t seed,
                        const FamilyConstants& consts = {});

// Exhaustive checks of the defining properties. `budget_cap` bounds the number
// of (T, j) resp. (T1, T2) combinations examined; exceeding it throws
// BudgetExceeded rather than guessing.
bool verify_ruff(const SetFamily& f, int t, double alpha,
                 std::uint64_t budget_cap = 50'000'000);
bool verify_cff(const SetFamily& f, int r, int t,
                std::uint64_t budget_cap = 50'000'000);

// m x n binary matrix whose column j is the indicator of set j.
IntMat indicator_matrix(const SetFamily& f);
SetFamily family_from_indicator(const IntMat& a, FamilyKind kind = FamilyKind::Ruff);

// Restricts every set to the first `rows` alphabet symbols. Used by the
// simulation harness to sweep RUFF row budgets; the result is generally not a
// valid design.
SetFamily truncate_alphabet(const SetFamily& f, int rows);

// Text format: line 1 `m n kind params` where params is `d t alpha` for ruff
// and `r t` for cff; then one line per set of space-separated sorted indices.
SetFamily read_set_family(const std::string& path);
void write_set_family(const SetFamily& f, const std::string& path);

}  // namespace mixclass
