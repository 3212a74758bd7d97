#include "mixclass/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixclass/errors.hpp"
#include "mixclass/rng.hpp"

namespace mixclass {
namespace {

constexpr std::uint64_t kSupportTag = 0x73757070ULL;
constexpr std::uint64_t kTwoStageLabelTag = 0x32676175ULL;
constexpr std::uint64_t kCffTag = 0x31636666ULL;
constexpr std::uint64_t kBlockTag = 0x31626c6bULL;

int decode_label(int poscount, int expected_positives) {
  return poscount != expected_positives ? 1 : -1;
}

std::vector<int> column_support(const IntMat& x, int t) {
  std::vector<int> s;
  for (int i = 0; i < x.rows(); ++i)
    if (x(i, t) == 1) s.push_back(i);
  return s;
}

SparseVector aggregate_estimate(const LabeledQuerySet& lqs, int k) {
  if (lqs.queries.empty()) throw ConfigError("estimate: no measurements");
  if (lqs.queries.size() != lqs.labels.size())
    throw ConfigError("estimate: query/label count mismatch");
  const int n = static_cast<int>(lqs.queries.front().size());
  Vec s = Vec::Zero(n);
  for (std::size_t i = 0; i < lqs.queries.size(); ++i) {
    if (lqs.labels[i] != 1 && lqs.labels[i] != -1)
      throw ConfigError("estimate: labels must be +/-1");
    for (int j : lqs.target_support) s[j] += lqs.labels[i] * lqs.queries[i][j];
  }
  s /= static_cast<double>(lqs.queries.size());

  // Hard threshold to the k largest magnitudes on the target support.
  std::vector<int> order(lqs.target_support);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(s[a]) > std::abs(s[b]); });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  std::vector<std::pair<int, double>> entries;
  for (int j : order)
    if (s[j] != 0.0) entries.emplace_back(j, s[j]);
  SparseVector est(n, std::move(entries));
  if (est.nnz() == 0) throw EstimationFailure("estimate: aggregate vanished");
  return est.normalized();
}

}  // namespace

SparseVector onebit_estimate(const LabeledQuerySet& lqs, int k) {
  return aggregate_estimate(lqs, k);
}

MatchResult match_and_error(const std::vector<SparseVector>& estimates,
                            const std::vector<SparseVector>& truth) {
  if (estimates.size() != truth.size()) throw ConfigError("match_and_error: count mismatch");
  const int ell = static_cast<int>(truth.size());
  if (ell > 8) throw ConfigError("match_and_error: ell > 8 unsupported");

  std::vector<Vec> t_dense, e_dense;
  for (const auto& b : truth) t_dense.push_back(b.normalized().to_dense());
  for (const auto& b : estimates) e_dense.push_back(b.to_dense());

  Mat dist(ell, ell);
  for (int i = 0; i < ell; ++i)
    for (int j = 0; j < ell; ++j) dist(i, j) = (t_dense[i] - e_dense[j]).norm();

  std::vector<int> sigma(ell), best;
  std::iota(sigma.begin(), sigma.end(), 0);
  double best_max = -1.0;
  do {
    double mx = 0.0;
    for (int i = 0; i < ell; ++i) mx = std::max(mx, dist(i, sigma[i]));
    if (best_max < 0.0 || mx < best_max) {  // lexicographically first sigma wins ties
      best_max = mx;
      best = sigma;
    }
  } while (std::next_permutation(sigma.begin(), sigma.end()));

  MatchResult r;
  r.sigma = best;
  r.max_error = best_max;
  r.errors.resize(ell);
  for (int i = 0; i < ell; ++i) r.errors[i] = dist(i, best[i]);
  return r;
}

RecoveryResult two_stage_recover(CountSource& counts, const MixtureInstance& truth, int k,
                                 double epsilon, std::uint64_t seed,
                                 const TwoStageOptions& opts) {
  const BudgetConfig& cfg = opts.budget;
  const int n = truth.dim();
  const int ell = truth.ell();

  SupportRecovery sup =
      recover_support_full(counts, n, k, ell, derive_seed(seed, kSupportTag), cfg);
  int t_sign = default_batchsize(ell, cfg.failure_budget, static_cast<std::uint64_t>(ell),
                                 cfg.batch_slack);
  std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, t_sign);

  const int m_labels = cfg.gaussian_label_count(k, epsilon);
  const double inf = cfg.inf_value(k, truth.mu_min());
  const double bound = cfg.max_query_magnitude;
  LabelQueryGen gen = opts.query_gen;
  if (!gen) {
    std::uint64_t base = derive_seed(seed, kTwoStageLabelTag);
    gen = [base, bound](int t, int w, int j) {
      return keyed_gaussian_bounded(base, static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(w),
                                    static_cast<std::uint64_t>(j), bound);
    };
  }
  int t_label = default_batchsize(
      ell, cfg.failure_budget, static_cast<std::uint64_t>(ell) * m_labels, cfg.batch_slack);
  counts.ledger().set_phase("recovery");

  RecoveryResult out;
  out.label_streams.assign(ell, {});
  for (int t = 0; t < ell; ++t) {
    std::vector<char> is_rep(n, 0);
    int expected_pos = 0;
    for (int q = 0; q < ell; ++q) {
      if (q == t) continue;
      is_rep[sup.x.reps[q]] = 1;
      if (signs[q] == 1) ++expected_pos;
    }
    LabeledQuerySet lqs;
    lqs.target_support = column_support(sup.x.x, t);
    Vec v(n);
    for (int w = 0; w < m_labels; ++w) {
      for (int j = 0; j < n; ++j) v[j] = is_rep[j] ? inf : gen(t, w, j);
      int y = decode_label(counts.counts(v, t_label).pos, expected_pos);
      lqs.queries.push_back(v);
      lqs.labels.push_back(y);
      out.label_streams[t].push_back(y);
    }
    out.estimates.push_back(onebit_estimate(lqs, k));
  }

  MatchResult m = match_and_error(out.estimates, truth.components());
  out.matching = m.sigma;
  out.errors = m.errors;
  out.max_error = m.max_error;
  out.queries_used = counts.ledger();
  return out;
}

double one_stage_block_entry(std::uint64_t block_seed, int round, int row, int coord,
                             double magnitude_bound) {
  return keyed_gaussian_bounded(block_seed, static_cast<std::uint64_t>(round),
                                static_cast<std::uint64_t>(row),
                                static_cast<std::uint64_t>(coord), magnitude_bound);
}

OneStageResult one_stage_recover(CountSource& counts, const MixtureInstance& truth, int k,
                                 double epsilon, std::uint64_t seed, const BudgetConfig& cfg) {
  const int n = truth.dim();
  const int ell = truth.ell();

  // The whole plan is fixed up front: support/sign batteries, the
  // (ell, ell*k)-CFF, and the keyed Gaussian entries of every block. The
  // cover strength is capped by what isolation can ever exclude.
  const int t_cff = std::max(1, std::min(ell * k, n - ell + 1));
  const SetFamily cff = construct_cff(n, ell, t_cff, derive_seed(seed, kCffTag), cfg.family);
  const std::uint64_t block_seed = derive_seed(seed, kBlockTag);
  const int d_blocks = cfg.gaussian_label_count(k, epsilon);
  const double inf = cfg.inf_value(k, truth.mu_min());
  const double bound = cfg.max_query_magnitude;

  SupportRecovery sup =
      recover_support_full(counts, n, k, ell, derive_seed(seed, kSupportTag), cfg);
  int t_sign = default_batchsize(ell, cfg.failure_budget, static_cast<std::uint64_t>(ell),
                                 cfg.batch_slack);
  std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, t_sign);

  int t_label = default_batchsize(ell, cfg.failure_budget,
                                  static_cast<std::uint64_t>(d_blocks) * cff.m, cfg.batch_slack);
  counts.ledger().set_phase("recovery");

  // poscount of every block row.
  std::vector<std::vector<char>> row_sets(cff.m, std::vector<char>(n, 0));
  for (int j = 0; j < n; ++j)
    for (int e : cff.sets[j]) row_sets[e][j] = 1;
  IntMat pos_counts(cff.m, d_blocks);
  Vec v(n);
  for (int w = 0; w < d_blocks; ++w) {
    for (int i = 0; i < cff.m; ++i) {
      for (int j = 0; j < n; ++j)
        v[j] = row_sets[i][j] ? inf : one_stage_block_entry(block_seed, w, i, j, bound);
      pos_counts(i, w) = counts.counts(v, t_label).pos;
    }
  }

  // Isolating row per component: Inf exactly on the other components'
  // representative coordinates within the support union.
  std::vector<int> u;
  IntVec rowsum = sup.x.x.rowwise().sum();
  for (int i = 0; i < n; ++i)
    if (rowsum[i] > 0) u.push_back(i);

  OneStageResult one;
  RecoveryResult& out = one.result;
  out.label_streams.assign(ell, {});
  one.label_rows.assign(ell, -1);
  for (int t = 0; t < ell; ++t) {
    std::vector<int> reps_other;
    int expected_pos = 0;
    for (int q = 0; q < ell; ++q) {
      if (q == t) continue;
      reps_other.push_back(sup.x.reps[q]);
      if (signs[q] == 1) ++expected_pos;
    }
    int row = -1;
    for (int i = 0; i < cff.m && row < 0; ++i) {
      bool ok = true;
      for (int rep : reps_other)
        if (!row_sets[i][rep]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      for (int q : u) {
        if (row_sets[i][q] &&
            std::find(reps_other.begin(), reps_other.end(), q) == reps_other.end()) {
          ok = false;
          break;
        }
      }
      if (ok) row = i;
    }
    if (row < 0)
      throw ConstructionFailure("one_stage_recover: no isolating battery row for a component");
    one.label_rows[t] = row;

    LabeledQuerySet lqs;
    lqs.target_support = column_support(sup.x.x, t);
    for (int w = 0; w < d_blocks; ++w) {
      int y = decode_label(pos_counts(row, w), expected_pos);
      Vec g = Vec::Zero(n);
      for (int j : lqs.target_support) g[j] = one_stage_block_entry(block_seed, w, row, j, bound);
      lqs.queries.push_back(std::move(g));
      lqs.labels.push_back(y);
      out.label_streams[t].push_back(y);
    }
    out.estimates.push_back(onebit_estimate(lqs, k));
  }

  MatchResult m = match_and_error(out.estimates, truth.components());
  out.matching = m.sigma;
  out.errors = m.errors;
  out.max_error = m.max_error;
  out.queries_used = counts.ledger();
  one.cff = cff;
  one.block_seed = block_seed;
  return one;
}

}  // namespace mixclass
