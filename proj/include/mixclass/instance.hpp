#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixclass/types.hpp"

namespace mixclass {

// A unit-norm real vector with explicit support. Entries are stored sparse
// (index/value, indices ascending, values nonzero).
class SparseVector {
 public:
  SparseVector() = default;
  // Builds from (index, value) pairs; zero values are dropped, indices sorted.
  SparseVector(int dim, std::vector<std::pair<int, double>> entries);
  // Builds from a dense vector, keeping nonzero entries.
  static SparseVector from_dense(const VecRef& v);

  int dim() const { return dim_; }
  int nnz() const { return static_cast<int>(idx_.size()); }
  const std::vector<int>& indices() const { return idx_; }
  const std::vector<double>& values() const { return val_; }
  double norm() const { return norm_; }
  bool is_unit(double tol = 1e-12) const;

  double dot(const VecRef& v) const;
  Vec to_dense() const;
  SparseVector normalized() const;

  // Smallest nonzero magnitude; 0 for the empty vector.
  double min_magnitude() const;

 private:
  int dim_ = 0;
  std::vector<int> idx_;
  std::vector<double> val_;
  double norm_ = 0.0;
};

// The ground truth held by the simulator: ell hidden unit-norm sparse vectors,
// an optional precision grid delta (entries in delta*Z when delta > 0), and the
// smallest nonzero entry magnitude across components.
class MixtureInstance {
 public:
  MixtureInstance(int dim, std::vector<SparseVector> components, double delta = 0.0);

  int dim() const { return dim_; }
  int ell() const { return static_cast<int>(components_.size()); }
  double delta() const { return delta_; }
  double mu_min() const { return mu_min_; }
  const std::vector<SparseVector>& components() const { return components_; }
  const SparseVector& component(int t) const { return components_[t]; }

  int max_support_size() const;
  // Union of all component supports, ascending.
  std::vector<int> support_union() const;
  // n x ell binary support matrix (column t indicates supp of component t).
  IntMat support_matrix() const;
  // True whenever every component has a coordinate outside all other supports.
  bool satisfies_separability() const;

 private:
  int dim_;
  std::vector<SparseVector> components_;
  double delta_;
  double mu_min_;
};

// Text format, one instance per file:
//   line 1: `n ell delta`
//   then per component: `k idx:val ...` (k pairs, 0-based indices)
MixtureInstance read_instance(const std::string& path);
void write_instance(const MixtureInstance& inst, const std::string& path);
// Writes estimates in the same format (used by the recover CLI).
void write_components(int dim, const std::vector<SparseVector>& comps, double delta,
                      const std::string& path);

}  // namespace mixclass
