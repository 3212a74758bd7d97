#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixclass/instance.hpp"
#include "mixclass/rng.hpp"
#include "mixclass/types.hpp"

namespace mixclass {

// The measurement sign convention: +1 for x >= 0.
inline int sign_of(double x) { return x >= 0.0 ? 1 : -1; }

// Estimated (pos, neg, z, nz) for one query vector. Invariants after
// clamping: pos + neg + z == ell and nz == pos + neg.
struct CountEstimate {
  int pos = 0;
  int neg = 0;
  int z = 0;
  int nz = 0;

  int ell() const { return pos + neg + z; }
  // Number of distinct response symbols among {-1, 0, +1}.
  int distinct() const { return (pos > 0) + (neg > 0) + (z > 0); }
  bool operator==(const CountEstimate& o) const {
    return pos == o.pos && neg == o.neg && z == o.z && nz == o.nz;
  }
};

// Multiset view over {-1, 0, +1}: pos copies of +1, neg of -1, z of 0.
std::vector<int> response_multiset(const CountEstimate& c);
std::vector<int> response_distinct(const CountEstimate& c);

// Oracle-call accounting, one counter per phase label.
class QueryLedger {
 public:
  void set_phase(const std::string& label) { phase_ = label; }
  const std::string& phase() const { return phase_; }
  void add(std::uint64_t calls) {
    total_ += calls;
    phases_[phase_] += calls;
  }
  std::uint64_t total() const { return total_; }
  std::uint64_t phase_total(const std::string& label) const {
    auto it = phases_.find(label);
    return it == phases_.end() ? 0 : it->second;
  }
  const std::map<std::string, std::uint64_t>& phases() const { return phases_; }
  void merge(const QueryLedger& other) {
    total_ += other.total_;
    for (const auto& [k, v] : other.phases_) phases_[k] += v;
  }

 private:
  std::uint64_t total_ = 0;
  std::string phase_ = "default";
  std::map<std::string, std::uint64_t> phases_;
};

// Smallest T with 4*exp(-T / (2 ell^2)) <= failure_budget / universe, where
// universe is the number of planned count estimates (union bound). `slack`
// scales the result.
int default_batchsize(int ell, double failure_budget, std::uint64_t universe,
                      double slack = 1.0);

// The simulated mixture responder. Holds the rng stream and the ledger; a
// single logical owner issues queries.
class MixtureOracle {
 public:
  MixtureOracle(const MixtureInstance& inst, std::uint64_t seed)
      : inst_(&inst), rng_(derive_seed(seed, 0x0eac1eULL)) {}

  int ell() const { return inst_->ell(); }
  const MixtureInstance& instance() const { return *inst_; }
  QueryLedger& ledger() { return ledger_; }
  const QueryLedger& ledger() const { return ledger_; }

  // One oracle call: samples a component uniformly, returns the 1-bit label.
  int respond(const VecRef& v);

  // Algorithm with the v / -v pairing: 2T oracle calls, returns clamped
  // estimates of (poscount, negcount, zcount, nzcount).
  CountEstimate estimate_counts(const VecRef& v, int T);

 private:
  const MixtureInstance* inst_;
  Rng rng_;
  QueryLedger ledger_;
};

// Brute-force counts straight from the hidden components. Pure; serves as the
// test oracle and as the `--exact-oracle` mode of the pipelines.
CountEstimate exact_counts(const MixtureInstance& inst, const VecRef& v);

// Count provider abstraction so every pipeline runs against either the batched
// estimator or the exact brute-force counts.
class CountSource {
 public:
  virtual ~CountSource() = default;
  virtual CountEstimate counts(const VecRef& v, int T) = 0;
  virtual int ell() const = 0;
  virtual QueryLedger& ledger() = 0;
  virtual bool exact() const = 0;
};

class EstimatedCountSource final : public CountSource {
 public:
  explicit EstimatedCountSource(MixtureOracle& oracle) : oracle_(&oracle) {}
  CountEstimate counts(const VecRef& v, int T) override { return oracle_->estimate_counts(v, T); }
  int ell() const override { return oracle_->ell(); }
  QueryLedger& ledger() override { return oracle_->ledger(); }
  bool exact() const override { return false; }

 private:
  MixtureOracle* oracle_;
};

class ExactCountSource final : public CountSource {
 public:
  explicit ExactCountSource(const MixtureInstance& inst) : inst_(&inst) {}
  // T is ignored; the ledger records one call per estimate.
  CountEstimate counts(const VecRef& v, int T) override;
  int ell() const override { return inst_->ell(); }
  QueryLedger& ledger() override { return ledger_; }
  bool exact() const override { return true; }
  const MixtureInstance& instance() const { return *inst_; }

 private:
  const MixtureInstance* inst_;
  QueryLedger ledger_;
};

}  // namespace mixclass
