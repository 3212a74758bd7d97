#include "mixclass/two_mix.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>

#include "mixclass/errors.hpp"
#include "mixclass/rng.hpp"
#include "mixclass/support.hpp"

namespace mixclass {
namespace {

constexpr std::uint64_t kRuffTag = 0x6c325266ULL;
constexpr std::uint64_t kPuffTag = 0x6c325066ULL;
constexpr std::uint64_t kGaussTag = 0x6c326776ULL;
constexpr std::uint64_t kPmTag = 0x6c32706dULL;

// Nonzero symbol of a response set expected to contain a zero.
int nonzero_symbol(const CountEstimate& c) {
  if (c.z < 1 || c.nz != 1)
    throw EstimationFailure("alignment: expected one zero and one nonzero response");
  return c.pos == 1 ? 1 : -1;
}

std::vector<int> sorted_diff(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::pair<std::vector<int>, std::vector<int>> l2_support(CountSource& counts, int n, int k,
                                                         std::uint64_t seed,
                                                         const BudgetConfig& cfg) {
  SetFamily ruff = construct_ruff(n, 2 * k, 0.5, derive_seed(seed, kRuffTag), cfg.family);
  return l2_support(counts, ruff, k, seed, cfg);
}

std::pair<std::vector<int>, std::vector<int>> l2_support(CountSource& counts,
                                                         const SetFamily& ruff, int k,
                                                         std::uint64_t seed,
                                                         const BudgetConfig& cfg) {
  if (counts.ell() != 2) throw ConfigError("l2_support: needs an ell = 2 mixture");
  const int n = ruff.n;
  const int t_design = 2 * k;

  int t_ruff = default_batchsize(2, cfg.failure_budget,
                                 static_cast<std::uint64_t>(std::max(ruff.m, 1)),
                                 cfg.batch_slack);
  IntVec s = compute_s_sizes(counts, ruff, t_ruff);

  bool mixed = false;
  for (int i = 0; i < n; ++i)
    if (s[i] == 1) mixed = true;
  std::vector<int> both;
  for (int i = 0; i < n; ++i)
    if (s[i] > 0) both.push_back(i);
  if (!mixed) return {both, both};

  // Pairwise intersections split the |S(i)| == 1 coordinates around a pivot.
  IntMat unions;
  int attempt = 0;
  const int t_puff = std::max(1, std::min(t_design, n - 2));
  for (;;) {
    SetFamily puff = construct_cff(n, 2, t_puff,
                                   derive_seed(seed, kPuffTag, static_cast<std::uint64_t>(attempt)),
                                   cfg.family);
    int t_puff = default_batchsize(2, cfg.failure_budget,
                                   static_cast<std::uint64_t>(3) * puff.m, cfg.batch_slack);
    try {
      unions = compute_union_sizes(counts, s, puff, t_puff,
                                   derive_seed(seed, kPuffTag, 0x7fULL + attempt),
                                   cfg.lazy_union_counts);
      break;
    } catch (const ConstructionFailure&) {
      if (++attempt > cfg.family_retries) throw;
    }
  }

  int i0 = -1;
  for (int i = 0; i < n && i0 < 0; ++i)
    if (s[i] == 1) i0 = i;
  std::vector<int> supp1{i0}, supp2;
  for (int j = 0; j < n; ++j) {
    if (j == i0) continue;
    if (s[j] == 2) {
      supp1.push_back(j);
      supp2.push_back(j);
    } else if (s[j] == 1) {
      int inter = s[i0] + s[j] - unions(i0, j);
      (inter >= 1 ? supp1 : supp2).push_back(j);
    }
  }
  std::sort(supp1.begin(), supp1.end());
  std::sort(supp2.begin(), supp2.end());
  return {supp1, supp2};
}

RecoveryResult l2_recover_diff_support(CountSource& counts, const MixtureInstance& truth,
                                       const std::vector<int>& supp1,
                                       const std::vector<int>& supp2, double epsilon,
                                       std::uint64_t seed, const BudgetConfig& cfg,
                                       const LabelQueryGen& query_gen) {
  const int n = truth.dim();
  const int k = std::max(1, static_cast<int>(std::max(supp1.size(), supp2.size())));

  // p lives in the support of exactly one component; that component plays the
  // pinned role below, streams are swapped back at the end if needed.
  std::vector<int> d12 = sorted_diff(supp1, supp2);
  std::vector<int> d21 = sorted_diff(supp2, supp1);
  if (d12.empty() && d21.empty())
    throw ConfigError("l2_recover_diff_support: supports are identical");
  const bool swapped = d12.empty();
  const int p = swapped ? d21.front() : d12.front();
  const std::vector<int>& supp_a = swapped ? supp2 : supp1;  // owns p
  const std::vector<int>& supp_b = swapped ? supp1 : supp2;

  counts.ledger().set_phase("recovery");
  const int m = cfg.gaussian_label_count(k, epsilon);
  int t = default_batchsize(2, cfg.failure_budget, 2ULL * m + 1, cfg.batch_slack);

  // sign(beta_a[p]) from the basis query: the other component projects to 0.
  Vec ep = Vec::Zero(n);
  ep[p] = 1.0;
  const int s_sign = counts.counts(ep, t).neg >= 1 ? -1 : 1;

  const double inf = cfg.inf_value(k, truth.mu_min());
  const double bound = cfg.max_query_magnitude;
  LabelQueryGen gen = query_gen;
  if (!gen) {
    std::uint64_t base = derive_seed(seed, kGaussTag);
    gen = [base, bound](int /*t*/, int round, int coord) {
      return keyed_gaussian_bounded(base, 0, static_cast<std::uint64_t>(round),
                                    static_cast<std::uint64_t>(coord), bound);
    };
  }

  LabeledQuerySet lqs_a, lqs_b;
  lqs_a.target_support = supp_a;
  lqs_b.target_support = supp_b;
  std::vector<int> stream_a, stream_b;  // full per-round decodes, 0 = undecided
  Vec v(n), v_shift(n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) v[j] = gen(0, i, j);
    v_shift = v;
    v_shift[p] += s_sign * inf;

    CountEstimate c1 = counts.counts(v_shift, t);  // Type 1: component a forced positive
    int y = 0;
    if (c1.pos == 2)
      y = 1;
    else if (c1.neg == 1)
      y = -1;

    CountEstimate c2 = counts.counts(v, t);  // Type 2: plain Gaussian
    int z = 0;
    if (y == 1) {
      if (c2.pos == 2)
        z = 1;
      else if (c2.neg == 1)
        z = -1;
    } else if (y == -1) {
      if (c2.pos == 1)
        z = 1;
      else if (c2.neg == 2)
        z = -1;
    } else {
      if (c2.pos == 1)
        z = 1;
      else if (c2.neg == 1)
        z = -1;
    }

    stream_b.push_back(y);
    stream_a.push_back(z);
    if (y != 0) {
      lqs_b.queries.push_back(v);
      lqs_b.labels.push_back(y);
    }
    if (z != 0) {
      lqs_a.queries.push_back(v);
      lqs_a.labels.push_back(z);
    }
  }

  RecoveryResult out;
  SparseVector est_a = onebit_estimate(lqs_a, k);
  SparseVector est_b = onebit_estimate(lqs_b, k);
  if (swapped) {
    out.estimates = {est_b, est_a};
    out.label_streams = {stream_b, stream_a};
  } else {
    out.estimates = {est_a, est_b};
    out.label_streams = {stream_a, stream_b};
  }
  MatchResult mr = match_and_error(out.estimates, truth.components());
  out.matching = mr.sigma;
  out.errors = mr.errors;
  out.max_error = mr.max_error;
  out.queries_used = counts.ledger();
  return out;
}

SparseVector subgaussian_estimate(const LabeledQuerySet& lqs, int k) {
  return onebit_estimate(lqs, k);  // same aggregate; queries are +/-1 valued
}

CountEstimate classify_response_set(CountSource& counts, const VecRef& v, int T) {
  return counts.counts(v, T);
}

AlignmentTuple align_zero_zero(CountSource& counts, const VecRef& v0, const VecRef& v, int T) {
  counts.ledger().set_phase("align");
  const int s0 = nonzero_symbol(counts.counts(v0, T));
  const int s = nonzero_symbol(counts.counts(v, T));
  CountEstimate combined = counts.counts(v0 + v, T);
  // A zero survives in v0 + v exactly when both zeros belong to one component.
  if (combined.z >= 1) return {{0, 0}, {s0, s}};
  return {{0, s}, {s0, 0}};
}

AlignmentTuple align_pivot_zero(CountSource& counts, const VecRef& v0, const VecRef& v, int T,
                                double inf_value) {
  counts.ledger().set_phase("align");
  const int s = nonzero_symbol(counts.counts(v, T));
  CountEstimate c = counts.counts(v0 + inf_value * v, T);
  // True multiset is {s, t}: the zero-on-v component keeps its pivot response
  // t, the other is dominated by Inf * <v, .> = s.
  if (c.z != 0 || (s == 1 && c.pos == 0) || (s == -1 && c.neg == 0))
    throw EstimationFailure("align_pivot_zero: response inconsistent with {s, t}");
  int pos_rest = c.pos - (s == 1 ? 1 : 0);
  int neg_rest = c.neg - (s == -1 ? 1 : 0);
  if (pos_rest + neg_rest != 1)
    throw EstimationFailure("align_pivot_zero: response inconsistent with {s, t}");
  const int t_sym = pos_rest == 1 ? 1 : -1;
  if (t_sym == 1) return {{1, 0}, {-1, s}};
  return {{1, s}, {-1, 0}};
}

std::vector<std::pair<int, int>> case3_ratio_grid(int k, double delta) {
  if (delta <= 0.0) throw ConfigError("case3_ratio_grid: delta must be positive");
  const int b = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k)) / delta));
  std::set<std::pair<int, int>> reduced;  // (c, d) in lowest terms
  for (int c = 1; c <= b; ++c)
    for (int d = 1; d <= b; ++d) {
      int g = std::gcd(c, d);
      reduced.insert({c / g, d / g});
    }
  std::vector<std::pair<int, int>> grid(reduced.begin(), reduced.end());
  std::sort(grid.begin(), grid.end(), [](const auto& a, const auto& b2) {
    return static_cast<long long>(a.first) * b2.second <
           static_cast<long long>(b2.first) * a.second;
  });
  return grid;
}

AlignmentTuple align_pivot_pm(CountSource& counts, const VecRef& v0, const VecRef& v, int k,
                              double delta, int T) {
  counts.ledger().set_phase("align");
  // Under co-alignment every positive combination keeps the response set at
  // {+1,-1}; under anti-alignment some swept ratio collapses it (or exposes a
  // zero at an interval endpoint). Query c*v0 + d*v, a positive rescaling of
  // eta*v0 + v with eta = c/d.
  for (const auto& [c, d] : case3_ratio_grid(k, delta)) {
    CountEstimate resp = counts.counts(static_cast<double>(c) * v0 + static_cast<double>(d) * v, T);
    if (!(resp.pos == 1 && resp.neg == 1)) return {{1, -1}, {-1, 1}};
  }
  return {{1, 1}, {-1, -1}};
}

RecoveryResult l2_recover_same_support(CountSource& counts, const MixtureInstance& truth,
                                       const std::vector<int>& support, double epsilon, int k,
                                       double delta, std::uint64_t seed,
                                       const BudgetConfig& cfg) {
  const int n = truth.dim();
  if (delta <= 0.0) throw ConfigError("l2_recover_same_support: needs delta > 0");
  for (const auto& c : truth.components()) {
    if (c.to_dense().cwiseAbs().maxCoeff() > 0.5) {
      std::cerr << "warning: component max magnitude exceeds 0.5; sub-Gaussian recovery "
                   "guarantees degrade\n";
      break;
    }
  }

  const int m = cfg.subgaussian_round_count(n, k, epsilon);
  const std::size_t sweep = case3_ratio_grid(k, delta).size();
  int t_cls = default_batchsize(2, cfg.failure_budget, static_cast<std::uint64_t>(m),
                                cfg.batch_slack);
  int t_aln = default_batchsize(
      2, cfg.failure_budget, std::max<std::uint64_t>(1, sweep * static_cast<std::uint64_t>(m)),
      cfg.batch_slack);

  counts.ledger().set_phase("recovery");
  Rng rng(derive_seed(seed, kPmTag));
  std::vector<Vec> queries(m, Vec(n));
  std::vector<CountEstimate> resp(m);
  std::vector<int> w_idx;
  LabeledQuerySet lqs_a, lqs_b;  // component a responds +1 to the pivot
  lqs_a.target_support = support;
  lqs_b.target_support = support;
  auto push = [](LabeledQuerySet& lqs, const Vec& q, int label) {
    if (label == 0) return;
    lqs.queries.push_back(q);
    lqs.labels.push_back(label);
  };

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) queries[i][j] = rng.sign_bit();
    resp[i] = classify_response_set(counts, queries[i], t_cls);
    if (resp[i].distinct() == 1) {
      int sym = resp[i].pos == 2 ? 1 : resp[i].neg == 2 ? -1 : 0;
      push(lqs_a, queries[i], sym);
      push(lqs_b, queries[i], sym);
    } else {
      w_idx.push_back(i);
    }
  }

  if (!w_idx.empty()) {
    int pivot = -1;
    for (int i : w_idx)
      if (resp[i].pos == 1 && resp[i].neg == 1) {
        pivot = i;
        break;
      }
    const double inf = cfg.inf_value(k, truth.mu_min());
    if (pivot >= 0) {
      push(lqs_a, queries[pivot], 1);
      push(lqs_b, queries[pivot], -1);
      for (int i : w_idx) {
        if (i == pivot) continue;
        try {
          AlignmentTuple tup =
              resp[i].z > 0
                  ? align_pivot_zero(counts, queries[pivot], queries[i], t_aln, inf)
                  : align_pivot_pm(counts, queries[pivot], queries[i], k, delta, t_aln);
          push(lqs_a, queries[i], tup.beta1.second);
          push(lqs_b, queries[i], tup.beta2.second);
        } catch (const EstimationFailure&) {
          // inconsistent alignment response; drop this round
        }
      }
    } else {
      // Every two-response query contains a zero; align them pairwise by
      // Proposition 1 with the first as pivot (component a owns its zero).
      int first = w_idx.front();
      push(lqs_a, queries[first], 0);
      push(lqs_b, queries[first], nonzero_symbol(resp[first]));
      for (std::size_t q = 1; q < w_idx.size(); ++q) {
        int i = w_idx[q];
        try {
          AlignmentTuple tup = align_zero_zero(counts, queries[first], queries[i], t_aln);
          push(lqs_a, queries[i], tup.beta1.second);
          push(lqs_b, queries[i], tup.beta2.second);
        } catch (const EstimationFailure&) {
        }
      }
    }
    counts.ledger().set_phase("recovery");
  }

  if (lqs_a.queries.empty() || lqs_b.queries.empty())
    throw EstimationFailure("l2_recover_same_support: no usable labels");

  RecoveryResult out;
  out.estimates = {subgaussian_estimate(lqs_a, k), subgaussian_estimate(lqs_b, k)};
  out.label_streams = {lqs_a.labels, lqs_b.labels};
  MatchResult mr = match_and_error(out.estimates, truth.components());
  out.matching = mr.sigma;
  out.errors = mr.errors;
  out.max_error = mr.max_error;
  out.queries_used = counts.ledger();
  return out;
}

RecoveryResult l2_recover(CountSource& counts, const MixtureInstance& truth, int k,
                          double epsilon, double delta, std::uint64_t seed, bool dense,
                          const BudgetConfig& cfg) {
  if (counts.ell() != 2) throw ConfigError("l2_recover: needs an ell = 2 mixture");
  const int n = truth.dim();
  if (dense) {
    std::vector<int> full(n);
    std::iota(full.begin(), full.end(), 0);
    return l2_recover_same_support(counts, truth, full, epsilon, n, delta, seed, cfg);
  }
  auto [supp1, supp2] = l2_support(counts, n, k, seed, cfg);
  if (supp1 == supp2)
    return l2_recover_same_support(counts, truth, supp1, epsilon, k, delta, seed, cfg);
  return l2_recover_diff_support(counts, truth, supp1, supp2, epsilon, seed, cfg);
}

}  // namespace mixclass
