#pragma once

#include <Eigen/Dense>

namespace mixclass {

template <class Scalar>
using DenseVector = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = DenseVector<double>;
using Mat = DenseMatrix<double>;
using IntVec = DenseVector<int>;
using IntMat = DenseMatrix<int>;  // 0/1 entries for indicator and support matrices

using VecRef = Eigen::Ref<const Vec>;

}  // namespace mixclass
