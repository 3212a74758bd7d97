#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "mixclass/errors.hpp"
#include "mixclass/support.hpp"
#include "test_util.hpp"

using namespace mixclass;
using testutil::from_supports;
using testutil::make_instance;

namespace {

// beta1 on {0,1}, beta2 on {1,2}, n = 4. |S| = (1,2,1,0).
MixtureInstance overlap_instance(std::uint64_t seed = 1) {
  return from_supports(4, {{0, 1}, {1, 2}}, seed);
}

IntVec exact_s_sizes(const MixtureInstance& inst) {
  IntMat x = inst.support_matrix();
  return x.rowwise().sum();
}

bool same_up_to_column_permutation(const IntMat& a, const IntMat& b) {
  return (canonical_columns(a) - canonical_columns(b)).cwiseAbs().sum() == 0;
}

// Random binary matrix with a dedicated singleton row per column.
IntMat random_separable_binary(int n, int ell, Rng& rng) {
  IntMat x = IntMat::Zero(n, ell);
  std::vector<int> singles = rng.sample_without_replacement(n, ell);
  for (int t = 0; t < ell; ++t) x(singles[t], t) = 1;
  for (int i = 0; i < n; ++i) {
    if (std::find(singles.begin(), singles.end(), i) != singles.end()) continue;
    for (int t = 0; t < ell; ++t) x(i, t) = rng.next_u64() & 1 ? 1 : 0;
  }
  return x;
}

}  // namespace

TEST_CASE("compute_s_sizes with the exact-count oracle") {
  MixtureInstance inst = overlap_instance();
  ExactCountSource counts(inst);
  SetFamily ruff = construct_ruff(4, 2 * 2, 0.5, 11);
  IntVec s = compute_s_sizes(counts, ruff, 1);
  CHECK(s[0] == 1);
  CHECK(s[1] == 2);
  CHECK(s[2] == 1);
  CHECK(s[3] == 0);
  CHECK(counts.ledger().phase_total("support-ruff") == static_cast<std::uint64_t>(ruff.m));
}

TEST_CASE("compute_s_sizes single component") {
  MixtureInstance inst = make_instance(5, {{{0, 1.0}}});
  ExactCountSource counts(inst);
  SetFamily ruff = construct_ruff(5, 1, 0.5, 3);
  IntVec s = compute_s_sizes(counts, ruff, 1);
  CHECK(s[0] == 1);
  for (int i = 1; i < 5; ++i) CHECK(s[i] == 0);
  CHECK(s.sum() >= 1);  // components are nonzero, so some coordinate is live
}

TEST_CASE("compute_s_sizes with estimated counts") {
  MixtureInstance inst = from_supports(10, {{0, 4, 7}, {2, 4}}, 5);
  MixtureOracle oracle(inst, 19);
  EstimatedCountSource counts(oracle);
  SetFamily ruff = construct_ruff(10, 2 * 3, 0.5, 13);
  int T = default_batchsize(2, 0.01, ruff.m);
  IntVec s = compute_s_sizes(counts, ruff, T);
  CHECK((s - exact_s_sizes(inst)).cwiseAbs().sum() == 0);
}

TEST_CASE("compute_union_sizes on the overlap instance") {
  MixtureInstance inst = overlap_instance();
  ExactCountSource counts(inst);
  IntVec s = exact_s_sizes(inst);
  SetFamily puff = construct_cff(4, 2, 4, 7);
  IntMat u = compute_union_sizes(counts, s, puff, 1, 99);

  CHECK(u(0, 1) == 2);
  CHECK(u(0, 2) == 2);
  CHECK(u(1, 2) == 2);
  CHECK(u(0, 3) == 1);  // 3 is outside the union: |S(0) u S(3)| = |S(0)|
  CHECK(u(1, 1) == 2);  // diagonal: |S(1)|
  CHECK(u(3, 3) == 0);
  CHECK((u - u.transpose()).cwiseAbs().sum() == 0);

  // Lazy evaluation returns the same matrix.
  ExactCountSource lazy_counts(inst);
  IntMat u_lazy = compute_union_sizes(lazy_counts, s, puff, 1, 99, /*lazy=*/true);
  CHECK((u - u_lazy).cwiseAbs().sum() == 0);
  CHECK(lazy_counts.ledger().total() < counts.ledger().total());
}

TEST_CASE("build_gram") {
  MixtureInstance inst = overlap_instance();
  IntVec s = exact_s_sizes(inst);

  SUBCASE("matches X X^T on the overlap instance") {
    ExactCountSource counts(inst);
    SetFamily puff = construct_cff(4, 2, 4, 7);
    IntMat u = compute_union_sizes(counts, s, puff, 1, 99);
    GramMatrix g = build_gram(s, u);
    IntMat x = inst.support_matrix();
    CHECK((g.z - x * x.transpose()).cwiseAbs().sum() == 0);
    CHECK(g.z(0, 0) == 1);
    CHECK(g.z(1, 1) == 2);
    CHECK(g.z(0, 1) == 1);
    CHECK(g.z(2, 3) == 0);
  }

  SUBCASE("inconsistent inputs are rejected") {
    IntMat u = IntMat::Zero(4, 4);
    u(0, 1) = u(1, 0) = 5;  // larger than |S(0)| + |S(1)|
    CHECK_THROWS_AS(build_gram(s, u), InconsistencyError);
  }

  SUBCASE("gram of consistent supports is PSD") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      IntMat x = random_separable_binary(8, 3, rng);
      Mat z = (x * x.transpose()).cast<double>();
      Eigen::SelfAdjointEigenSolver<Mat> eig(z);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("factorize_support") {
  SUBCASE("overlap instance Gram") {
    MixtureInstance inst = overlap_instance();
    IntMat x = inst.support_matrix();
    GramMatrix g{x * x.transpose()};
    SupportMatrix rec = factorize_support(g, 2);
    CHECK(same_up_to_column_permutation(rec.x, x));
    CHECK(rec.reps == std::vector<int>{0, 2});
  }

  SUBCASE("identity factorization") {
    IntMat x = IntMat::Zero(6, 3);
    x(1, 0) = x(3, 1) = x(4, 2) = 1;
    GramMatrix g{x * x.transpose()};
    SupportMatrix rec = factorize_support(g, 3);
    CHECK(same_up_to_column_permutation(rec.x, x));
  }

  SUBCASE("single cluster fails for ell = 2") {
    IntMat z = IntMat::Zero(3, 3);
    z(0, 0) = z(1, 1) = 1;
    z(0, 1) = z(1, 0) = 1;
    CHECK_THROWS_AS(factorize_support(GramMatrix{z}, 2), AssumptionViolated);
  }

  SUBCASE("random separable matrices round-trip") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(derive_seed(seed, 77));
      int n = 4 + static_cast<int>(rng.uniform_int(47));
      int ell = 1 + static_cast<int>(rng.uniform_int(4));
      IntMat x = random_separable_binary(n, ell, rng);
      SupportMatrix rec = factorize_support(GramMatrix{x * x.transpose()}, ell);
      CHECK(same_up_to_column_permutation(rec.x, x));
    }
  }
}

TEST_CASE("recover_support end to end") {
  SUBCASE("exact counts, exhaustive small sweep") {
    // All support patterns with n <= 5, sizes <= 2; pairs must be separable.
    for (int n = 2; n <= 5; ++n) {
      std::vector<std::vector<int>> subsets;
      for (int i = 0; i < n; ++i) subsets.push_back({i});
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) subsets.push_back({i, j});

      for (std::size_t a = 0; a < subsets.size(); ++a) {
        MixtureInstance one = from_supports(n, {subsets[a]}, a);
        ExactCountSource counts(one);
        SupportMatrix rec = recover_support(counts, n, 2, 1, a);
        CHECK(same_up_to_column_permutation(rec.x, one.support_matrix()));
      }
      for (std::size_t a = 0; a < subsets.size(); ++a) {
        for (std::size_t b = 0; b < subsets.size(); ++b) {
          const auto& s1 = subsets[a];
          const auto& s2 = subsets[b];
          auto contains = [](const std::vector<int>& big, const std::vector<int>& small) {
            return std::includes(big.begin(), big.end(), small.begin(), small.end());
          };
          if (contains(s1, s2) || contains(s2, s1)) continue;
          MixtureInstance inst = from_supports(n, {s1, s2}, a * 31 + b);
          ExactCountSource counts(inst);
          SupportMatrix rec = recover_support(counts, n, 2, 2, a * 131 + b);
          CHECK(same_up_to_column_permutation(rec.x, inst.support_matrix()));
        }
      }
    }
  }

  SUBCASE("estimated counts on a moderate instance") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      MixtureInstance inst = from_supports(30, {{0, 8, 9}, {8, 17, 22}}, seed);
      MixtureOracle oracle(inst, seed * 7 + 1);
      EstimatedCountSource counts(oracle);
      SupportMatrix rec = recover_support(counts, 30, 3, 2, seed);
      ok += same_up_to_column_permutation(rec.x, inst.support_matrix());
    }
    CHECK(ok >= 9);
  }

  SUBCASE("nested supports violate the separability assumption") {
    MixtureInstance inst = from_supports(6, {{0, 1}, {0}}, 3);
    ExactCountSource counts(inst);
    CHECK_THROWS_AS(recover_support(counts, 6, 2, 2, 1), AssumptionViolated);
  }

  SUBCASE("identical supports violate the separability assumption") {
    MixtureInstance inst = make_instance(6, {{{0, 0.6}, {1, 0.8}}, {{0, 0.8}, {1, -0.6}}});
    ExactCountSource counts(inst);
    CHECK_THROWS_AS(recover_support(counts, 6, 2, 2, 1), AssumptionViolated);
  }
}

TEST_CASE("representative coordinates and signs") {
  SUBCASE("two components with positive reps") {
    MixtureInstance inst = make_instance(3, {{{0, 0.6}, {1, 0.8}}, {{2, 1.0}}});
    ExactCountSource counts(inst);
    SupportRecovery sup = recover_support_full(counts, 3, 2, 2, 5);
    CHECK(sup.x.reps == std::vector<int>{0, 2});
    std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, 1);
    CHECK(signs == std::vector<int>{1, 1});
  }

  SUBCASE("negative rep entry flips the sign") {
    MixtureInstance inst = make_instance(3, {{{0, 0.6}, {1, 0.8}}, {{2, -1.0}}});
    ExactCountSource counts(inst);
    SupportRecovery sup = recover_support_full(counts, 3, 2, 2, 5);
    std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, 1);
    CHECK(signs == std::vector<int>{1, -1});
  }

  SUBCASE("single component") {
    MixtureInstance inst = make_instance(3, {{{1, -1.0}}});
    ExactCountSource counts(inst);
    SupportRecovery sup = recover_support_full(counts, 3, 1, 1, 5);
    std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, 1);
    CHECK(signs == std::vector<int>{-1});
  }

  SUBCASE("representative_coordinates reads singleton rows") {
    IntMat x = IntMat::Zero(5, 2);
    x(1, 0) = x(2, 0) = x(2, 1) = x(4, 1) = 1;
    CHECK(representative_coordinates(x) == std::vector<int>{1, 4});
    IntMat nested = IntMat::Zero(3, 2);
    nested(0, 0) = nested(0, 1) = nested(1, 0) = 1;
    CHECK(representative_coordinates(nested) == std::vector<int>{1, -1});
  }
}

TEST_CASE("canonical column ordering") {
  IntMat x = IntMat::Zero(4, 2);
  x(0, 0) = x(1, 1) = 1;
  IntMat y = IntMat::Zero(4, 2);
  y(0, 1) = y(1, 0) = 1;  // same columns, swapped
  CHECK(same_up_to_column_permutation(x, y));
  IntMat z = IntMat::Zero(4, 2);
  z(0, 0) = z(2, 1) = 1;
  CHECK_FALSE(same_up_to_column_permutation(x, z));
}
