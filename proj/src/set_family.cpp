#include "mixclass/set_family.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "mixclass/errors.hpp"
#include "mixclass/rng.hpp"

namespace mixclass {
namespace {

double log_size(int n) { return std::log(static_cast<double>(std::max(n, 2))); }

// At small n the log factor underestimates the union-bound constants the
// randomized constructions need; the floor keeps small batteries reliable.
double floored_log_size(int n) { return std::max(log_size(n), 5.0); }

// Packed membership bitsets, one word-row per set.
struct BitFamily {
  int m = 0;
  int words = 0;
  std::vector<std::uint64_t> bits;  // n * words

  explicit BitFamily(const SetFamily& f) : m(f.m), words((f.m + 63) / 64) {
    bits.assign(static_cast<std::size_t>(f.n) * words, 0);
    for (int j = 0; j < f.n; ++j)
      for (int e : f.sets[j]) row(j)[e >> 6] |= 1ULL << (e & 63);
  }
  std::uint64_t* row(int j) { return bits.data() + static_cast<std::size_t>(j) * words; }
  const std::uint64_t* row(int j) const {
    return bits.data() + static_cast<std::size_t>(j) * words;
  }
};

std::uint64_t binom(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (r > cap) return cap + 1;  // saturate; only compared against cap
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace

bool SetFamily::contains(int set_index, int element) const {
  const auto& s = sets[set_index];
  return std::binary_search(s.begin(), s.end(), element);
}

SetFamily construct_ruff(int n, int t, double alpha, std::uint64_t seed,
                         const FamilyConstants& consts) {
  if (n < 1 || t < 1 || alpha <= 0.0 || alpha > 1.0)
    throw ConfigError("construct_ruff: need n >= 1, t >= 1, alpha in (0,1]");
  SetFamily f;
  f.n = n;
  f.kind = FamilyKind::Ruff;
  f.t = t;
  f.alpha = alpha;
  f.d = static_cast<int>(std::ceil(consts.c_d * t * log_size(n) / alpha));
  f.m = static_cast<int>(std::ceil(consts.c_m * t * t * log_size(n) / (alpha * alpha)));
  f.m = std::max(f.m, f.d);
  Rng rng(derive_seed(seed, 0x52554646ULL));
  f.sets.reserve(n);
  for (int j = 0; j < n; ++j) {
    auto s = rng.sample_without_replacement(f.m, f.d);
    std::sort(s.begin(), s.end());
    f.sets.push_back(std::move(s));
  }
  return f;
}

SetFamily construct_cff(int n, int r, int t, std::uint64_t seed, const FamilyConstants& consts) {
  if (n < 1 || r < 1 || t < 1) throw ConfigError("construct_cff: need positive n, r, t");
  // The defining property needs n >= r + t distinct indices; for smaller n it
  // is vacuous and the battery is still usable, so only n >= r is enforced.
  if (n < r) throw ConfigError("construct_cff: need n >= r");
  SetFamily f;
  f.n = n;
  f.kind = FamilyKind::Cff;
  f.r = r;
  f.t = t;
  f.m = static_cast<int>(std::ceil(consts.c_c * std::pow(t, r + 1) * floored_log_size(n)));
  Rng rng(derive_seed(seed, 0x434646ULL));
  double p = 1.0 / (t + 1);
  f.sets.assign(n, {});
  for (int i = 0; i < f.m; ++i)
    for (int j = 0; j < n; ++j)
      if (rng.uniform() < p) f.sets[j].push_back(i);
  return f;
}

bool verify_ruff(const SetFamily& f, int t, double alpha, std::uint64_t budget_cap) {
  if (t < 1 || alpha < 0.0 || alpha > 1.0) throw ConfigError("verify_ruff: bad parameters");
  if (f.n == 0) return true;
  std::size_t d = f.sets[0].size();
  for (const auto& s : f.sets)
    if (s.size() != d) throw ConfigError("verify_ruff: sets must have equal size");
  if (f.n <= t) return true;  // no (T, j) pair exists
  std::uint64_t combos = binom(static_cast<std::uint64_t>(f.n) - 1, t, budget_cap);
  if (combos > budget_cap / f.n)
    throw BudgetExceeded("verify_ruff: C(n-1,t)*n exceeds the verification cap");

  BitFamily bf(f);
  double threshold = (1.0 - alpha) * static_cast<double>(d);
  std::vector<std::uint64_t> cover(bf.words);
  // Enumerate T subsets of size t; check every j outside T.
  std::vector<int> pick(t);
  for (int i = 0; i < t; ++i) pick[i] = i;
  while (true) {
    std::fill(cover.begin(), cover.end(), 0);
    for (int i : pick) {
      const std::uint64_t* row = bf.row(i);
      for (int w = 0; w < bf.words; ++w) cover[w] |= row[w];
    }
    for (int j = 0; j < f.n; ++j) {
      if (std::find(pick.begin(), pick.end(), j) != pick.end()) continue;
      const std::uint64_t* row = bf.row(j);
      int kept = 0;
      for (int w = 0; w < bf.words; ++w)
        kept += std::popcount(row[w] & ~cover[w]);
      if (!(kept > threshold)) return false;
    }
    // next combination
    int i = t - 1;
    while (i >= 0 && pick[i] == f.n - t + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int q = i + 1; q < t; ++q) pick[q] = pick[q - 1] + 1;
  }
  return true;
}

bool verify_cff(const SetFamily& f, int r, int t, std::uint64_t budget_cap) {
  if (r < 1 || t < 1) throw ConfigError("verify_cff: bad parameters");
  if (f.n < r + t) throw ConfigError("verify_cff: need n >= r + t");
  std::uint64_t c1 = binom(f.n, r, budget_cap);
  std::uint64_t c2 = binom(static_cast<std::uint64_t>(f.n) - r, t, budget_cap);
  if (c1 > budget_cap || c2 > budget_cap || c1 > budget_cap / std::max<std::uint64_t>(c2, 1))
    throw BudgetExceeded("verify_cff: C(n,r)*C(n-r,t) exceeds the verification cap");

  BitFamily bf(f);
  std::vector<std::uint64_t> inter(bf.words), cover(bf.words);
  std::vector<int> t1(r), rest, t2(t);
  for (int i = 0; i < r; ++i) t1[i] = i;
  while (true) {
    std::fill(inter.begin(), inter.end(), ~0ULL);
    for (int i : t1) {
      const std::uint64_t* row = bf.row(i);
      for (int w = 0; w < bf.words; ++w) inter[w] &= row[w];
    }
    rest.clear();
    for (int j = 0; j < f.n; ++j)
      if (std::find(t1.begin(), t1.end(), j) == t1.end()) rest.push_back(j);
    // enumerate T2 among rest
    for (int i = 0; i < t; ++i) t2[i] = i;
    while (true) {
      std::fill(cover.begin(), cover.end(), 0);
      for (int q : t2) {
        const std::uint64_t* row = bf.row(rest[q]);
        for (int w = 0; w < bf.words; ++w) cover[w] |= row[w];
      }
      bool nonempty = false;
      for (int w = 0; w < bf.words && !nonempty; ++w)
        if (inter[w] & ~cover[w]) nonempty = true;
      if (!nonempty) return false;
      int i = t - 1;
      int limit = static_cast<int>(rest.size());
      while (i >= 0 && t2[i] == limit - t + i) --i;
      if (i < 0) break;
      ++t2[i];
      for (int q = i + 1; q < t; ++q) t2[q] = t2[q - 1] + 1;
    }
    int i = r - 1;
    while (i >= 0 && t1[i] == f.n - r + i) --i;
    if (i < 0) break;
    ++t1[i];
    for (int q = i + 1; q < r; ++q) t1[q] = t1[q - 1] + 1;
  }
  return true;
}

IntMat indicator_matrix(const SetFamily& f) {
  IntMat a = IntMat::Zero(f.m, f.n);
  for (int j = 0; j < f.n; ++j)
    for (int e : f.sets[j]) a(e, j) = 1;
  return a;
}

SetFamily family_from_indicator(const IntMat& a, FamilyKind kind) {
  SetFamily f;
  f.m = static_cast<int>(a.rows());
  f.n = static_cast<int>(a.cols());
  f.kind = kind;
  f.sets.assign(f.n, {});
  for (int j = 0; j < f.n; ++j)
    for (int i = 0; i < f.m; ++i)
      if (a(i, j) != 0) f.sets[j].push_back(i);
  if (!f.sets.empty()) f.d = static_cast<int>(f.sets[0].size());
  return f;
}

SetFamily truncate_alphabet(const SetFamily& f, int rows) {
  SetFamily g = f;
  g.m = std::max(0, std::min(rows, f.m));
  for (auto& s : g.sets) {
    auto it = std::lower_bound(s.begin(), s.end(), g.m);
    s.erase(it, s.end());
  }
  return g;
}

SetFamily read_set_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open set family file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("empty set family file: " + path);
  std::istringstream hs(header);
  SetFamily f;
  std::string kind;
  if (!(hs >> f.m >> f.n >> kind)) throw ConfigError("bad set family header in " + path);
  if (kind == "ruff") {
    f.kind = FamilyKind::Ruff;
    if (!(hs >> f.d >> f.t >> f.alpha)) throw ConfigError("bad ruff params in " + path);
  } else if (kind == "cff") {
    f.kind = FamilyKind::Cff;
    if (!(hs >> f.r >> f.t)) throw ConfigError("bad cff params in " + path);
  } else {
    throw ConfigError("unknown set family kind: " + kind);
  }
  f.sets.reserve(f.n);
  std::string line;
  for (int j = 0; j < f.n; ++j) {
    if (!std::getline(in, line)) throw ConfigError("truncated set family file: " + path);
    std::istringstream ls(line);
    std::vector<int> s;
    int e;
    while (ls >> e) {
      if (e < 0 || e >= f.m) throw ConfigError("set element out of range in " + path);
      s.push_back(e);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    f.sets.push_back(std::move(s));
  }
  return f;
}

void write_set_family(const SetFamily& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write to " + path);
  out << f.m << ' ' << f.n << ' ';
  if (f.kind == FamilyKind::Ruff)
    out << "ruff " << f.d << ' ' << f.t << ' ' << f.alpha;
  else
    out << "cff " << f.r << ' ' << f.t;
  out << '\n';
  for (const auto& s : f.sets) {
    for (std::size_t p = 0; p < s.size(); ++p) out << (p ? " " : "") << s[p];
    out << '\n';
  }
}

}  // namespace mixclass
