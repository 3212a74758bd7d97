#include "mixclass/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mixclass/errors.hpp"

namespace mixclass {

std::vector<int> response_multiset(const CountEstimate& c) {
  std::vector<int> r;
  r.reserve(c.ell());
  for (int i = 0; i < c.neg; ++i) r.push_back(-1);
  for (int i = 0; i < c.z; ++i) r.push_back(0);
  for (int i = 0; i < c.pos; ++i) r.push_back(1);
  return r;
}

std::vector<int> response_distinct(const CountEstimate& c) {
  std::vector<int> r;
  if (c.neg > 0) r.push_back(-1);
  if (c.z > 0) r.push_back(0);
  if (c.pos > 0) r.push_back(1);
  return r;
}

int default_batchsize(int ell, double failure_budget, std::uint64_t universe, double slack) {
  if (ell < 1 || failure_budget <= 0.0 || failure_budget >= 1.0 || universe < 1)
    throw ConfigError("default_batchsize: bad parameters");
  double t = 2.0 * ell * ell *
             std::log(4.0 * static_cast<double>(universe) / failure_budget);
  return std::max(1, static_cast<int>(std::ceil(slack * t)));
}

int MixtureOracle::respond(const VecRef& v) {
  if (v.size() != inst_->dim()) throw ConfigError("respond: query dimension mismatch");
  ledger_.add(1);
  int j = static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(inst_->ell())));
  return sign_of(inst_->component(j).dot(v));
}

CountEstimate MixtureOracle::estimate_counts(const VecRef& v, int T) {
  if (v.size() != inst_->dim()) throw ConfigError("estimate_counts: query dimension mismatch");
  if (T < 1) throw ConfigError("estimate_counts: batchsize must be positive");
  const int ell = inst_->ell();
  // The projections are fixed across the batch; each draw only picks a
  // component, so precompute the per-component responses to v and -v.
  std::vector<int> y_resp(ell), z_resp(ell);
  for (int j = 0; j < ell; ++j) {
    double ip = inst_->component(j).dot(v);
    y_resp[j] = sign_of(ip);
    z_resp[j] = sign_of(-ip);
  }
  long long sum_yz = 0;  // sum over i of y_i + z_i
  long long neg_y = 0;   // #{i : y_i == -1}
  for (int i = 0; i < T; ++i) {
    int j = static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(ell)));
    sum_yz += y_resp[j];
    if (y_resp[j] == -1) ++neg_y;
    j = static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(ell)));
    sum_yz += z_resp[j];
  }
  ledger_.add(2ULL * static_cast<std::uint64_t>(T));

  auto clamp_ell = [ell](long long x) {
    return static_cast<int>(std::clamp<long long>(x, 0, ell));
  };
  CountEstimate c;
  c.z = clamp_ell(std::llround(static_cast<double>(ell) * static_cast<double>(sum_yz) /
                               (2.0 * T)));
  c.neg = clamp_ell(std::llround(static_cast<double>(ell) * static_cast<double>(neg_y) / T));
  c.nz = ell - c.z;
  if (c.neg > c.nz) c.neg = c.nz;
  c.pos = c.nz - c.neg;
  return c;
}

CountEstimate exact_counts(const MixtureInstance& inst, const VecRef& v) {
  if (v.size() != inst.dim()) throw ConfigError("exact_counts: query dimension mismatch");
  CountEstimate c;
  for (int j = 0; j < inst.ell(); ++j) {
    double ip = inst.component(j).dot(v);
    if (ip > 0.0)
      ++c.pos;
    else if (ip < 0.0)
      ++c.neg;
    else
      ++c.z;
  }
  c.nz = c.pos + c.neg;
  return c;
}

CountEstimate ExactCountSource::counts(const VecRef& v, int /*T*/) {
  ledger_.add(1);
  return exact_counts(*inst_, v);
}

}  // namespace mixclass
