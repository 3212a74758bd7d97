#include "mixclass/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mixclass/errors.hpp"

namespace mixclass {

SparseVector::SparseVector(int dim, std::vector<std::pair<int, double>> entries) : dim_(dim) {
  std::sort(entries.begin(), entries.end());
  double sq = 0.0;
  for (const auto& [i, v] : entries) {
    if (i < 0 || i >= dim) throw ConfigError("sparse vector index out of range");
    if (!idx_.empty() && idx_.back() == i) throw ConfigError("duplicate sparse vector index");
    if (v == 0.0) continue;
    idx_.push_back(i);
    val_.push_back(v);
    sq += v * v;
  }
  norm_ = std::sqrt(sq);
}

SparseVector SparseVector::from_dense(const VecRef& v) {
  std::vector<std::pair<int, double>> entries;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) entries.emplace_back(i, v[i]);
  return SparseVector(static_cast<int>(v.size()), std::move(entries));
}

bool SparseVector::is_unit(double tol) const { return std::abs(norm_ - 1.0) <= tol; }

double SparseVector::dot(const VecRef& v) const {
  double s = 0.0;
  for (std::size_t p = 0; p < idx_.size(); ++p) s += val_[p] * v[idx_[p]];
  return s;
}

Vec SparseVector::to_dense() const {
  Vec v = Vec::Zero(dim_);
  for (std::size_t p = 0; p < idx_.size(); ++p) v[idx_[p]] = val_[p];
  return v;
}

SparseVector SparseVector::normalized() const {
  if (norm_ == 0.0) throw ConfigError("cannot normalize the zero vector");
  std::vector<std::pair<int, double>> entries;
  entries.reserve(idx_.size());
  for (std::size_t p = 0; p < idx_.size(); ++p) entries.emplace_back(idx_[p], val_[p] / norm_);
  return SparseVector(dim_, std::move(entries));
}

double SparseVector::min_magnitude() const {
  double m = 0.0;
  for (double v : val_) {
    double a = std::abs(v);
    if (m == 0.0 || a < m) m = a;
  }
  return m;
}

MixtureInstance::MixtureInstance(int dim, std::vector<SparseVector> components, double delta)
    : dim_(dim), components_(std::move(components)), delta_(delta) {
  if (dim_ <= 0) throw ConfigError("instance dimension must be positive");
  if (components_.empty()) throw ConfigError("instance needs at least one component");
  mu_min_ = std::numeric_limits<double>::infinity();
  for (const auto& c : components_) {
    if (c.dim() != dim_) throw ConfigError("component dimension mismatch");
    if (c.nnz() == 0) throw ConfigError("components must be nonzero");
    if (!c.is_unit()) throw ConfigError("components must be unit norm");
    if (delta_ > 0.0) {
      for (double v : c.values()) {
        double q = v / delta_;
        if (std::abs(q - std::round(q)) > 1e-9)
          throw ConfigError("component entry off the delta grid");
      }
    }
    mu_min_ = std::min(mu_min_, c.min_magnitude());
  }
}

int MixtureInstance::max_support_size() const {
  int k = 0;
  for (const auto& c : components_) k = std::max(k, c.nnz());
  return k;
}

std::vector<int> MixtureInstance::support_union() const {
  std::vector<int> u;
  for (const auto& c : components_) u.insert(u.end(), c.indices().begin(), c.indices().end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

IntMat MixtureInstance::support_matrix() const {
  IntMat x = IntMat::Zero(dim_, ell());
  for (int t = 0; t < ell(); ++t)
    for (int i : components_[t].indices()) x(i, t) = 1;
  return x;
}

bool MixtureInstance::satisfies_separability() const {
  IntMat x = support_matrix();
  IntVec rowsum = x.rowwise().sum();
  for (int t = 0; t < ell(); ++t) {
    bool has_private = false;
    for (int i = 0; i < dim_ && !has_private; ++i)
      if (x(i, t) == 1 && rowsum[i] == 1) has_private = true;
    if (!has_private) return false;
  }
  return true;
}

MixtureInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  int n = 0, ell = 0;
  double delta = 0.0;
  if (!(in >> n >> ell >> delta)) throw ConfigError("bad instance header in " + path);
  std::vector<SparseVector> comps;
  for (int t = 0; t < ell; ++t) {
    int k = 0;
    if (!(in >> k)) throw ConfigError("bad component count in " + path);
    std::vector<std::pair<int, double>> entries;
    for (int p = 0; p < k; ++p) {
      std::string tok;
      if (!(in >> tok)) throw ConfigError("truncated component in " + path);
      auto colon = tok.find(':');
      if (colon == std::string::npos) throw ConfigError("bad idx:val token in " + path);
      entries.emplace_back(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    }
    comps.emplace_back(n, std::move(entries));
  }
  return MixtureInstance(n, std::move(comps), delta);
}

void write_components(int dim, const std::vector<SparseVector>& comps, double delta,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write to " + path);
  out.precision(17);
  out << dim << ' ' << comps.size() << ' ' << delta << '\n';
  for (const auto& c : comps) {
    out << c.nnz();
    for (int p = 0; p < c.nnz(); ++p) out << ' ' << c.indices()[p] << ':' << c.values()[p];
    out << '\n';
  }
}

void write_instance(const MixtureInstance& inst, const std::string& path) {
  write_components(inst.dim(), inst.components(), inst.delta(), path);
}

}  // namespace mixclass
