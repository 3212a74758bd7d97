#include "mixclass/support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mixclass/errors.hpp"
#include "mixclass/rng.hpp"

namespace mixclass {
namespace {

// Row view of a family: for each alphabet symbol, the columns containing it.
std::vector<std::vector<int>> rows_of(const SetFamily& f) {
  std::vector<std::vector<int>> rows(f.m);
  for (int j = 0; j < f.n; ++j)
    for (int e : f.sets[j]) rows[e].push_back(j);
  return rows;
}

constexpr std::uint64_t kRuffTag = 0x5355462dULL;
constexpr std::uint64_t kPuffTag = 0x50554646ULL;
constexpr std::uint64_t kValueTag = 0x42766131ULL;

}  // namespace

IntVec compute_s_sizes(CountSource& counts, const SetFamily& ruff, int T) {
  const int ell = counts.ell();
  const auto rows = rows_of(ruff);
  counts.ledger().set_phase("support-ruff");

  // nzcount per battery row.
  std::vector<int> row_nz(ruff.m, 0);
  Vec query = Vec::Zero(ruff.n);
  for (int e = 0; e < ruff.m; ++e) {
    for (int j : rows[e]) query[j] = 1.0;
    row_nz[e] = counts.counts(query, T).nz;
    for (int j : rows[e]) query[j] = 0.0;
  }

  // overlap[h] = |supp(b^h) ∩ H_j|; the chain b^0 ⊇ b^1 ⊇ ... makes the C_h
  // sets nested, which we assert below.
  IntVec s = IntVec::Zero(ruff.n);
  std::vector<std::vector<char>> member(ell + 1, std::vector<char>(ruff.n, 0));
  for (int j = 0; j < ruff.n; ++j) {
    const auto& set = ruff.sets[j];
    int dj = static_cast<int>(set.size());
    std::vector<int> overlap(ell + 1, 0);
    for (int e : set)
      for (int h = 0; h <= std::min(row_nz[e], ell); ++h) ++overlap[h];
    if (dj == 0) {
      s[j] = 0;  // no battery evidence for this coordinate
      continue;
    }
    int best = -1;
    for (int h = 0; h <= ell; ++h) {
      if (2 * overlap[h] >= dj) {
        member[h][j] = 1;
        best = h;
      }
    }
    s[j] = std::max(best, 0);
  }
  for (int h = 0; h < ell; ++h)
    for (int j = 0; j < ruff.n; ++j)
      if (member[h + 1][j] && !member[h][j])
        throw EstimationFailure("compute_s_sizes: threshold chain is not nested");
  return s;
}

IntMat compute_union_sizes(CountSource& counts, const IntVec& s_sizes, const SetFamily& puff,
                           int T, std::uint64_t value_seed, bool lazy) {
  const int n = puff.n;
  const int ell = counts.ell();
  if (s_sizes.size() != n) throw ConfigError("compute_union_sizes: size mismatch");
  counts.ledger().set_phase("support-puff");

  std::vector<int> u;  // union of supports
  for (int i = 0; i < n; ++i)
    if (s_sizes[i] > 0) u.push_back(i);

  const auto rows = rows_of(puff);
  // count(p) = max over the ell+1 value matrices of nzcount of row p. All
  // matrices share the support pattern; values are fresh Uniform(0,1) draws,
  // deterministic per (matrix, row).
  Vec query = Vec::Zero(n);
  std::vector<int> count(puff.m, -1);
  auto eval_row = [&](int p) {
    if (count[p] >= 0) return count[p];
    int best = 0;
    for (int w = 0; w < ell + 1; ++w) {
      Rng row_rng(derive_seed(value_seed, kValueTag, static_cast<std::uint64_t>(w),
                              static_cast<std::uint64_t>(p)));
      for (int j : rows[p]) query[j] = row_rng.uniform();
      best = std::max(best, counts.counts(query, T).nz);
      for (int j : rows[p]) query[j] = 0.0;
    }
    count[p] = best;
    return best;
  };
  if (!lazy)
    for (int p = 0; p < puff.m; ++p) eval_row(p);

  // Occupancy of each battery row by union-support columns; an isolating row
  // for (i, j) is in H_i and H_j and in no other union column.
  std::vector<int> occupancy(puff.m, 0);
  for (int q : u)
    for (int e : puff.sets[q]) ++occupancy[e];

  IntMat out = IntMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      int value;
      if (i == j) {
        value = s_sizes[i];
      } else if (s_sizes[i] == 0) {
        value = s_sizes[j];
      } else if (s_sizes[j] == 0) {
        value = s_sizes[i];
      } else {
        int row = -1;
        for (int e : puff.sets[i]) {
          if (occupancy[e] == 2 && puff.contains(j, e)) {
            row = e;
            break;
          }
        }
        if (row < 0)
          throw ConstructionFailure("compute_union_sizes: no isolating row for a pair");
        value = eval_row(row);
      }
      out(i, j) = out(j, i) = value;
    }
  }
  return out;
}

GramMatrix build_gram(const IntVec& s_sizes, const IntMat& union_sizes) {
  const int n = static_cast<int>(s_sizes.size());
  if (union_sizes.rows() != n || union_sizes.cols() != n)
    throw ConfigError("build_gram: size mismatch");
  GramMatrix g;
  g.z = IntMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int v = i == j ? s_sizes[i] : s_sizes[i] + s_sizes[j] - union_sizes(i, j);
      if (v < 0) throw InconsistencyError("build_gram: negative entry from inclusion-exclusion");
      g.z(i, j) = v;
    }
  }
  return g;
}

SupportMatrix factorize_support(const GramMatrix& gram, int ell) {
  const IntMat& z = gram.z;
  const int n = static_cast<int>(z.rows());
  if (ell < 1) throw ConfigError("factorize_support: ell must be positive");

  // Singleton rows correspond to coordinates owned by exactly one component;
  // under separability every component owns at least one.
  std::vector<int> singletons;
  for (int i = 0; i < n; ++i)
    if (z(i, i) == 1) singletons.push_back(i);

  // Cluster singleton rows by the relation Z[i][j] == 1 (same component).
  std::vector<int> cluster(singletons.size(), -1);
  std::vector<int> reps;
  for (std::size_t a = 0; a < singletons.size(); ++a) {
    if (cluster[a] >= 0) continue;
    int id = static_cast<int>(reps.size());
    cluster[a] = id;
    reps.push_back(singletons[a]);
    for (std::size_t b = a + 1; b < singletons.size(); ++b)
      if (cluster[b] < 0 && z(singletons[a], singletons[b]) >= 1) cluster[b] = id;
  }
  if (static_cast<int>(reps.size()) != ell)
    throw AssumptionViolated("factorize_support: found " + std::to_string(reps.size()) +
                             " singleton clusters, expected " + std::to_string(ell));
  std::sort(reps.begin(), reps.end());

  SupportMatrix out;
  out.reps = reps;
  out.x = IntMat::Zero(n, ell);
  for (int t = 0; t < ell; ++t)
    for (int i = 0; i < n; ++i) out.x(i, t) = std::min(z(i, reps[t]), 1);

  if ((out.x * out.x.transpose() - z).cwiseAbs().sum() != 0)
    throw InconsistencyError("factorize_support: X X^T does not reproduce Z");
  return out;
}

SupportRecovery recover_support_full(CountSource& counts, int n, int k, int ell,
                                     std::uint64_t seed, const BudgetConfig& cfg) {
  if (n < 1 || k < 1 || ell < 1) throw ConfigError("recover_support: bad parameters");
  const int t_design = ell * k;

  SetFamily ruff = construct_ruff(n, t_design, 0.5, derive_seed(seed, kRuffTag), cfg.family);
  int t_ruff = default_batchsize(ell, cfg.failure_budget,
                                 static_cast<std::uint64_t>(ruff.m), cfg.batch_slack);
  IntVec s_sizes = compute_s_sizes(counts, ruff, t_ruff);

  if (n == 1) {  // no pairs to isolate
    IntMat unions1(1, 1);
    unions1(0, 0) = s_sizes[0];
    return {factorize_support(build_gram(s_sizes, unions1), ell), std::move(ruff)};
  }

  IntMat unions;
  int attempt = 0;
  // Isolating a pair only ever excludes |U| - 2 <= n - 2 other columns.
  const int t_puff_design = std::max(1, std::min(t_design, n - 2));
  for (;;) {
    SetFamily puff = construct_cff(n, 2, t_puff_design,
                                   derive_seed(seed, kPuffTag, static_cast<std::uint64_t>(attempt)),
                                   cfg.family);
    int t_puff = default_batchsize(
        ell, cfg.failure_budget, static_cast<std::uint64_t>(ell + 1) * puff.m, cfg.batch_slack);
    try {
      unions = compute_union_sizes(counts, s_sizes, puff, t_puff,
                                   derive_seed(seed, kPuffTag, 0x7fULL + attempt),
                                   cfg.lazy_union_counts);
      break;
    } catch (const ConstructionFailure&) {
      if (++attempt > cfg.family_retries) throw;
    }
  }
  return {factorize_support(build_gram(s_sizes, unions), ell), std::move(ruff)};
}

SupportMatrix recover_support(CountSource& counts, int n, int k, int ell, std::uint64_t seed,
                              const BudgetConfig& cfg) {
  return recover_support_full(counts, n, k, ell, seed, cfg).x;
}

std::vector<int> representative_coordinates(const IntMat& x) {
  const int n = static_cast<int>(x.rows());
  const int ell = static_cast<int>(x.cols());
  IntVec rowsum = x.rowwise().sum();
  std::vector<int> reps(ell, -1);
  for (int t = 0; t < ell; ++t)
    for (int i = 0; i < n; ++i)
      if (x(i, t) == 1 && rowsum[i] == 1) {
        reps[t] = i;
        break;
      }
  return reps;
}

std::vector<int> recover_rep_signs(CountSource& counts, const SupportMatrix& x,
                                   const SetFamily& ruff, int T) {
  const int n = static_cast<int>(x.x.rows());
  const int ell = static_cast<int>(x.x.cols());
  if (ruff.n != n) throw ConfigError("recover_rep_signs: family size mismatch");
  counts.ledger().set_phase("sign");

  std::vector<int> u;
  IntVec rowsum = x.x.rowwise().sum();
  for (int i = 0; i < n; ++i)
    if (rowsum[i] > 0) u.push_back(i);

  std::vector<int> occupancy(ruff.m, 0);
  for (int q : u)
    for (int e : ruff.sets[q]) ++occupancy[e];

  const auto rows = rows_of(ruff);
  std::vector<int> signs(ell, 0);
  Vec query = Vec::Zero(n);
  for (int t = 0; t < ell; ++t) {
    int rep = x.reps.size() > static_cast<std::size_t>(t) ? x.reps[t] : -1;
    if (rep < 0) throw AssumptionViolated("recover_rep_signs: missing representative");
    int row = -1;
    for (int e : ruff.sets[rep])
      if (occupancy[e] == 1) {
        row = e;
        break;
      }
    if (row < 0)
      throw ConstructionFailure("recover_rep_signs: no isolating battery row");
    for (int j : rows[row]) query[j] = 1.0;
    CountEstimate c = counts.counts(query, T);
    for (int j : rows[row]) query[j] = 0.0;
    signs[t] = c.pos > 0 ? 1 : -1;
  }
  return signs;
}

IntMat canonical_columns(const IntMat& x) {
  const int n = static_cast<int>(x.rows());
  const int ell = static_cast<int>(x.cols());
  std::vector<int> order(ell);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](int a, int b) {
    for (int i = 0; i < n; ++i)
      if (x(i, a) != x(i, b)) return x(i, a) > x(i, b);
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  IntMat out(n, ell);
  for (int t = 0; t < ell; ++t) out.col(t) = x.col(order[t]);
  return out;
}

}  // namespace mixclass
