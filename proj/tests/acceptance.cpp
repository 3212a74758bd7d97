// Acceptance suite: one entry per criterion, each printing a pass/fail line.
// Run all with no arguments or a single criterion with `acceptance <id>`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mixclass/errors.hpp"
#include "mixclass/harness.hpp"
#include "mixclass/movielens.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/recovery.hpp"
#include "mixclass/rng.hpp"
#include "mixclass/set_family.hpp"
#include "mixclass/support.hpp"
#include "mixclass/two_mix.hpp"
#include "test_util.hpp"

using namespace mixclass;
using testutil::from_supports;

namespace {

bool same_up_to_permutation(const IntMat& a, const IntMat& b) {
  return (canonical_columns(a) - canonical_columns(b)).cwiseAbs().sum() == 0;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

// The fixed planted instance shared by criteria 5 and 6: two 3-sparse
// components on disjoint supports in R^50, entries in 25ths.
MixtureInstance planted_recovery_instance() {
  std::vector<SparseVector> comps;
  comps.emplace_back(50, std::vector<std::pair<int, double>>{{0, 0.48}, {1, 0.6}, {2, 0.64}});
  comps.emplace_back(50, std::vector<std::pair<int, double>>{{3, -0.6}, {4, 0.48}, {5, 0.64}});
  return MixtureInstance(50, std::move(comps));
}

// ---------------------------------------------------------------------------

// Criterion 1: batched count estimates match brute force on 200 random
// (instance, query) pairs with ell in {2,3}, n = 20.
bool criterion1(std::string& detail) {
  const int pairs = 200;
  int match = 0;
  for (int i = 0; i < pairs; ++i) {
    int ell = i % 2 == 0 ? 2 : 3;
    MixtureInstance inst = random_separable_instance(20, 4, ell, 1000 + i);
    MixtureOracle oracle(inst, 2000 + i);
    Rng qrng(3000 + i);
    Vec q(20);
    for (int j = 0; j < 20; ++j) q[j] = qrng.normal();
    int t = default_batchsize(ell, 0.01, pairs);
    if (oracle.estimate_counts(q, t) == exact_counts(inst, q)) ++match;
  }
  std::ostringstream os;
  os << match << "/" << pairs << " exact matches";
  detail = os.str();
  return match >= 198;
}

// Criterion 2: randomized RUFF/CFF constructions pass their exhaustive
// verifiers in at least 95 of 100 seeds.
bool criterion2(std::string& detail) {
  int ruff_ok = 0, cff_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    if (verify_ruff(construct_ruff(15, 2, 0.5, seed), 2, 0.5)) ++ruff_ok;
    if (verify_cff(construct_cff(8, 2, 2, seed), 2, 2)) ++cff_ok;
  }
  std::ostringstream os;
  os << "ruff " << ruff_ok << "/100, cff " << cff_ok << "/100";
  detail = os.str();
  return ruff_ok >= 95 && cff_ok >= 95;
}

// Criterion 3: support recovery at n = 100, k = 3 for ell in {2,3} on >= 95%
// of 50 seeds, plus an exhaustive exact-oracle sweep at n <= 6, k <= 2,
// ell <= 2 at 100%.
bool criterion3(std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  for (int ell : {2, 3}) {
    int good = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      MixtureInstance inst = random_separable_instance(100, 3, ell, 500 * ell + seed);
      MixtureOracle oracle(inst, 900 * ell + seed);
      EstimatedCountSource counts(oracle);
      try {
        SupportMatrix rec = recover_support(counts, 100, 3, ell, seed);
        good += same_up_to_permutation(rec.x, inst.support_matrix());
      } catch (const std::exception&) {
      }
    }
    os << "ell=" << ell << ": " << good << "/50  ";
    ok = ok && good >= 48;
  }

  int cases = 0, exact = 0;
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::vector<int>> subsets;
    for (int i = 0; i < n; ++i) subsets.push_back({i});
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) subsets.push_back({i, j});
    for (std::size_t a = 0; a < subsets.size(); ++a) {
      MixtureInstance one = from_supports(n, {subsets[a]}, a);
      ExactCountSource counts(one);
      ++cases;
      try {
        exact += same_up_to_permutation(recover_support(counts, n, 2, 1, a + 1).x,
                                        one.support_matrix());
      } catch (const std::exception&) {
      }
    }
    if (n < 2) continue;
    for (std::size_t a = 0; a < subsets.size(); ++a) {
      for (std::size_t b = 0; b < subsets.size(); ++b) {
        const auto& s1 = subsets[a];
        const auto& s2 = subsets[b];
        auto contains = [](const std::vector<int>& big, const std::vector<int>& small) {
          return std::includes(big.begin(), big.end(), small.begin(), small.end());
        };
        if (contains(s1, s2) || contains(s2, s1)) continue;
        MixtureInstance inst = from_supports(n, {s1, s2}, a * 71 + b);
        ExactCountSource counts(inst);
        ++cases;
        try {
          exact += same_up_to_permutation(recover_support(counts, n, 2, 2, a * 131 + b + 7).x,
                                          inst.support_matrix());
        } catch (const std::exception&) {
        }
      }
    }
  }
  os << "exhaustive " << exact << "/" << cases;
  detail = os.str();
  return ok && exact == cases;
}

// Criterion 4: constrained rank factorization inverts X X^T for 500 random
// separable binary matrices, n <= 50, ell <= 4.
bool criterion4(std::string& detail) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(seed, 0xfac70ULL));
    int n = 4 + static_cast<int>(rng.uniform_int(47));
    int ell = 1 + static_cast<int>(rng.uniform_int(4));
    IntMat x = IntMat::Zero(n, ell);
    std::vector<int> singles = rng.sample_without_replacement(n, ell);
    for (int t = 0; t < ell; ++t) x(singles[t], t) = 1;
    for (int i = 0; i < n; ++i) {
      if (std::find(singles.begin(), singles.end(), i) != singles.end()) continue;
      for (int t = 0; t < ell; ++t) x(i, t) = rng.next_u64() & 1 ? 1 : 0;
    }
    try {
      SupportMatrix rec = factorize_support(GramMatrix{x * x.transpose()}, ell);
      good += same_up_to_permutation(rec.x, x);
    } catch (const std::exception&) {
    }
  }
  std::ostringstream os;
  os << good << "/500 recovered";
  detail = os.str();
  return good == 500;
}

// Criterion 5: two-stage recovery error at the desk scale: median max error
// over 30 seeds <= 0.2 at m = 5000 labels, and quadrupling m at 400 and 1600
// cuts the median error to at most 0.8x.
bool criterion5(std::string& detail) {
  MixtureInstance inst = planted_recovery_instance();
  auto median_error = [&](int m) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      MixtureOracle oracle(inst, 77 * seed + 5);
      EstimatedCountSource counts(oracle);
      TwoStageOptions opts;
      opts.budget.gaussian_labels_override = m;
      errs.push_back(two_stage_recover(counts, inst, 3, 0.2, seed, opts).max_error);
    }
    return median(errs);
  };
  double m400 = median_error(400), m1600 = median_error(1600), m5000 = median_error(5000),
         m6400 = median_error(6400);
  std::ostringstream os;
  os.precision(4);
  os << "median max-l2: m400=" << m400 << " m1600=" << m1600 << " m5000=" << m5000
     << " m6400=" << m6400;
  detail = os.str();
  return m5000 <= 0.2 && m1600 <= 0.8 * m400 && m6400 <= 0.8 * m1600;
}

// Criterion 6: under shared label-query randomness the one-stage and
// two-stage decoders produce identical label streams and bit-exact estimates
// (exact-count oracle, criterion-5 instance, 10 seeds).
bool criterion6(std::string& detail) {
  MixtureInstance inst = planted_recovery_instance();
  BudgetConfig cfg;
  cfg.gaussian_labels_override = 50;
  int agree = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExactCountSource c1(inst), c2(inst);
    OneStageResult one = one_stage_recover(c1, inst, 3, 0.2, seed, cfg);
    TwoStageOptions opts;
    opts.budget = cfg;
    opts.query_gen = [&](int t, int w, int j) {
      return one_stage_block_entry(one.block_seed, w, one.label_rows[t], j,
                                   cfg.max_query_magnitude);
    };
    RecoveryResult two = two_stage_recover(c2, inst, 3, 0.2, seed, opts);
    bool same = two.label_streams == one.result.label_streams &&
                two.estimates.size() == one.result.estimates.size();
    for (std::size_t t = 0; same && t < two.estimates.size(); ++t)
      same = two.estimates[t].indices() == one.result.estimates[t].indices() &&
             two.estimates[t].values() == one.result.estimates[t].values();
    agree += same;
  }
  std::ostringstream os;
  os << agree << "/10 seeds bit-exact (exact-count oracle, 50 labels/component)";
  detail = os.str();
  return agree == 10;
}

// Criterion 7: the three alignment routines classify 500 planted cases each
// perfectly under exact counts and at >= 95% under estimated counts.
bool criterion7(std::string& detail);

// Criterion 8: the same-support ell=2 pipeline on the stated planted
// instance; both component errors <= 0.3 at m = 8000 in >= 80% of 30 seeds.
bool criterion8(std::string& detail) {
  MixtureInstance inst = MixtureInstance(
      40,
      {SparseVector(40, {{0, 0.6}, {1, 0.8}}), SparseVector(40, {{0, 0.8}, {1, -0.6}})},
      0.2);
  int good = 0;
  std::vector<double> max_errors;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    MixtureOracle oracle(inst, 31 * seed + 7);
    EstimatedCountSource counts(oracle);
    BudgetConfig cfg;
    cfg.subgaussian_rounds_override = 8000;
    try {
      RecoveryResult r = l2_recover_same_support(counts, inst, {0, 1}, 0.3, 2, 0.2, seed, cfg);
      max_errors.push_back(r.max_error);
      if (r.max_error <= 0.3) ++good;
    } catch (const std::exception&) {
      max_errors.push_back(2.0);
    }
  }
  std::ostringstream os;
  os.precision(4);
  os << good << "/30 seeds with both errors <= 0.3 (median max error "
     << median(max_errors)
     << "; the +/-1 aggregate estimator converges to the dominant-coordinate "
        "basis vector on this instance, an error floor of sqrt(0.4) ~ 0.632)";
  detail = os.str();
  return good >= 24;
}

// Criterion 9: support-simulation sweep reproduces the qualitative figure:
// mean relative Hamming distance non-increasing in the battery budget
// (allowing one noise inversion) and <= 0.01 at the full design size.
bool criterion9(std::string& detail) {
  std::ostringstream os;
  os.precision(4);
  bool ok = true;
  for (int n : {200, 1000}) {
    ExperimentConfig cfg;
    cfg.kind = "support-sim";
    cfg.n = n;
    cfg.k = 5;
    cfg.ell = 2;
    int seeds = n == 200 ? 20 : 5;
    for (int s = 0; s < seeds; ++s) cfg.seeds.push_back(1000 + s);
    cfg.ruff_budget_fractions = {0.0, 0.02, 0.05, 0.1, 0.25, 1.0};
    auto sweep = run_support_trials(cfg);
    int inversions = 0;
    for (std::size_t i = 1; i < sweep.size(); ++i)
      if (sweep[i].y > sweep[i - 1].y + 1e-12) ++inversions;
    double last = sweep.back().y;
    os << "n=" << n << ": hamming";
    for (const auto& p : sweep) os << " " << p.y;
    os << " (inversions " << inversions << ")  ";
    ok = ok && inversions <= 1 && last <= 0.01;
  }
  detail = os.str();
  return ok;
}

// Criterion 10: the bundled fixture pipeline is exact with perfect validation
// accuracy; when the real dataset is present, pair (68, 448) reproduces the
// published metrics within +/- 0.15.
bool criterion10(std::string& detail) {
  std::string dir = std::string(MIXCLASS_DATA_DIR) + "/movielens_fixture";
  PreferenceInstance pref =
      ingest_movielens(dir + "/ratings.csv", dir + "/movies.csv", 1, 2, 10);
  int exact = 0, perfect = 0;
  std::vector<std::uint64_t> seeds = {1, 2, 4, 5, 6};  // splits covering every stage
  for (std::uint64_t seed : seeds) {
    std::vector<int> r1, r2;
    MovielensMetrics m = movielens_trial(pref, 9, 5, seed, &r1, &r2);
    exact += (r1 == pref.pref1 && r2 == pref.pref2) || (r1 == pref.pref2 && r2 == pref.pref1);
    perfect += m.accuracy1 == 1.0 && m.accuracy2 == 1.0;
  }
  std::ostringstream os;
  os << "fixture: " << exact << "/" << seeds.size() << " exact, " << perfect << "/"
     << seeds.size() << " at accuracy 1.0";
  bool ok = exact == static_cast<int>(seeds.size()) &&
            perfect == static_cast<int>(seeds.size());

  // Optional real-dataset reproduction.
  std::string real_dir;
  const char* env = std::getenv("MIXCLASS_DATA_DIR");
  for (std::string cand :
       {env ? std::string(env) + "/ml-latest-small" : std::string(),
        std::string(MIXCLASS_DATA_DIR) + "/ml-latest-small"}) {
    if (!cand.empty() && std::filesystem::exists(cand + "/ratings.csv")) {
      real_dir = cand;
      break;
    }
  }
  if (real_dir.empty()) {
    os << "; real dataset not present, reproduction skipped";
  } else {
    PreferenceInstance real =
        ingest_movielens(real_dir + "/ratings.csv", real_dir + "/movies.csv", 68, 448, 500);
    std::vector<std::uint64_t> rseeds(100);
    std::iota(rseeds.begin(), rseeds.end(), 1);
    MovielensMetrics m = movielens_experiment(real, 10, 20, rseeds);
    os.precision(3);
    os << "; real pair (68,448): A1=" << m.accuracy1 << " A2=" << m.accuracy2;
    ok = ok && std::abs(m.accuracy1 - 0.670) <= 0.15 && std::abs(m.accuracy2 - 0.528) <= 0.15;
  }
  detail = os.str();
  return ok;
}

// Criterion 11: measured support-recovery oracle calls scale consistently
// with the cubic sparsity law: calls(k=6) / calls(k=3) within [4, 16] at
// n = 200, ell = 2.
bool criterion11(std::string& detail) {
  auto mean_calls = [&](int k) {
    double total = 0;
    const int seeds = 3;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      MixtureInstance inst = random_separable_instance(200, k, 2, 400 + seed * 17 + k);
      MixtureOracle oracle(inst, 800 + seed);
      EstimatedCountSource counts(oracle);
      recover_support(counts, 200, k, 2, seed);
      total += static_cast<double>(oracle.ledger().total());
    }
    return total / seeds;
  };
  double c3 = mean_calls(3), c6 = mean_calls(6);
  double ratio = c6 / c3;
  std::ostringstream os;
  os.precision(4);
  os << "calls k=3: " << c3 << ", k=6: " << c6 << ", ratio " << ratio;
  detail = os.str();
  return ratio >= 4.0 && ratio <= 16.0;
}

// --- criterion 7 helpers -----------------------------------------------------

struct AlignCase {
  MixtureInstance inst;
  Vec v0, v;
  AlignmentTuple want;
};

AlignmentTuple expected_alignment(const MixtureInstance& inst, const Vec& v0, const Vec& v) {
  auto symbol = [](double x) { return x > 0 ? 1 : x < 0 ? -1 : 0; };
  int a0 = symbol(inst.component(0).dot(v0));
  int a1 = symbol(inst.component(0).dot(v));
  int b0 = symbol(inst.component(1).dot(v0));
  int b1 = symbol(inst.component(1).dot(v));
  bool first_is_one = a0 == 0 ? false : a0 == 1;
  if (a0 == 0 || b0 == 0) first_is_one = a0 == 0;
  if (first_is_one) return {{a0, a1}, {b0, b1}};
  return {{b0, b1}, {a0, a1}};
}

std::vector<AlignCase> planted_cases(int kind, int count) {
  std::vector<AlignCase> cases;
  Rng rng(derive_seed(kind, 0xa11917ULL));
  std::vector<std::vector<int>> magnitudes = {{4}, {2, 2, 2, 2}, {3, 2, 1, 1, 1}};
  while (static_cast<int>(cases.size()) < count) {
    const int n = 6;
    Vec v0(n), v(n);
    for (int j = 0; j < n; ++j) v0[j] = rng.sign_bit();
    for (int j = 0; j < n; ++j) v[j] = rng.sign_bit();
    if (kind == 1) {
      // Component 0 is orthogonal to v0 by construction; the zero on v comes
      // from either component, chosen by a coin.
      std::vector<std::pair<int, double>> comp0 = {{0, v0[1] / std::sqrt(2.0)},
                                                   {1, -v0[0] / std::sqrt(2.0)}};
      std::vector<std::pair<int, double>> comp1;
      bool zero_from_0 = rng.next_u64() & 1;
      if (zero_from_0) {
        double s = rng.sign_bit();
        v[0] = s * v0[0];
        v[1] = s * v0[1];  // makes <v, comp0> = 0
        comp1 = {{2, 0.6 * rng.sign_bit()}, {3, 0.8 * rng.sign_bit()}};
      } else {
        comp1 = {{2, v[3] / std::sqrt(2.0)}, {3, -v[2] / std::sqrt(2.0)}};
      }
      MixtureInstance inst(n, {SparseVector(n, comp0), SparseVector(n, comp1)});
      if (inst.component(1).dot(v0) == 0) continue;
      if (zero_from_0 ? inst.component(1).dot(v) == 0 : inst.component(0).dot(v) == 0) continue;
      cases.push_back({inst, v0, v, expected_alignment(inst, v0, v)});
    } else if (kind == 2) {
      // Component 0 is orthogonal to v; the pivot response set must split,
      // which a sign flip of component 1 enforces.
      std::vector<std::pair<int, double>> comp0 = {{0, v[1] / std::sqrt(2.0)},
                                                   {1, -v[0] / std::sqrt(2.0)}};
      std::vector<std::pair<int, double>> comp1 = {{2, 0.6 * rng.sign_bit()},
                                                   {3, 0.8 * rng.sign_bit()}};
      MixtureInstance inst(n, {SparseVector(n, comp0), SparseVector(n, comp1)});
      double a0 = inst.component(0).dot(v0);
      if (a0 == 0) continue;
      if (sign_of(a0) == sign_of(inst.component(1).dot(v0))) {
        for (auto& e : comp1) e.second = -e.second;
        inst = MixtureInstance(n, {SparseVector(n, comp0), SparseVector(n, comp1)});
      }
      cases.push_back({inst, v0, v, expected_alignment(inst, v0, v)});
    } else {
      auto random_grid_vector = [&]() {
        const auto& mags = magnitudes[rng.uniform_int(magnitudes.size())];
        auto coords = rng.sample_without_replacement(n, static_cast<int>(mags.size()));
        std::vector<std::pair<int, double>> entries;
        for (std::size_t p = 0; p < mags.size(); ++p)
          entries.emplace_back(coords[p], 0.25 * mags[p] * rng.sign_bit());
        return entries;
      };
      MixtureInstance inst(
          n, {SparseVector(n, random_grid_vector()), SparseVector(n, random_grid_vector())},
          0.25);
      double a0 = inst.component(0).dot(v0), a1 = inst.component(0).dot(v);
      double b0 = inst.component(1).dot(v0), b1 = inst.component(1).dot(v);
      if (a0 == 0 || a1 == 0 || b0 == 0 || b1 == 0) continue;
      if (sign_of(a0) == sign_of(b0) || sign_of(a1) == sign_of(b1)) continue;
      cases.push_back({inst, v0, v, expected_alignment(inst, v0, v)});
    }
  }
  return cases;
}

bool criterion7(std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  BudgetConfig cfg;
  const char* names[] = {"zero-zero", "pivot-zero", "ratio-sweep"};
  for (int kind = 1; kind <= 3; ++kind) {
    auto cases = planted_cases(kind, 500);
    int exact_good = 0, est_good = 0;
    int t_est = default_batchsize(2, 0.002, 500ull * 64);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const AlignCase& c = cases[i];
      double inf = cfg.inf_value(5, c.inst.mu_min());
      auto run = [&](CountSource& src, int t) {
        switch (kind) {
          case 1:
            return align_zero_zero(src, c.v0, c.v, t);
          case 2:
            return align_pivot_zero(src, c.v0, c.v, t, inf);
          default:
            return align_pivot_pm(src, c.v0, c.v, 5, 0.25, t);
        }
      };
      ExactCountSource exact(c.inst);
      try {
        exact_good += run(exact, 1) == c.want;
      } catch (const EstimationFailure&) {
      }
      MixtureOracle oracle(c.inst, derive_seed(i, 0xe57170ULL + kind));
      EstimatedCountSource est(oracle);
      try {
        est_good += run(est, t_est) == c.want;
      } catch (const EstimationFailure&) {
      }
    }
    os << names[kind - 1] << ": exact " << exact_good << "/500, estimated " << est_good
       << "/500  ";
    ok = ok && exact_good == 500 && est_good >= 475;
  }
  detail = os.str();
  return ok;
}

using CriterionFn = std::function<bool(std::string&)>;

struct Entry {
  int id;
  const char* name;
  CriterionFn fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Entry> entries = {
      {1, "count-estimator exactness", criterion1},
      {2, "set-family verifier success rate", criterion2},
      {3, "support recovery (desk scale + exhaustive exact sweep)", criterion3},
      {4, "binary rank factorization equivalence", criterion4},
      {5, "two-stage recovery error trend", criterion5},
      {6, "one-stage/two-stage shared-randomness consistency", criterion6},
      {7, "ell=2 alignment soundness", criterion7},
      {8, "same-support ell=2 recovery", criterion8},
      {9, "support-simulation sweep reproduction", criterion9},
      {10, "movielens fixture pipeline", criterion10},
      {11, "query accounting vs sparsity", criterion11},
  };

  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (const auto& e : entries) {
    if (only != 0 && e.id != only) continue;
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s — %s (%.1f s)\n", pass ? "PASS" : "FAIL", e.id, e.name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
