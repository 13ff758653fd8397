/// \file types.hpp
/// \brief Common Eigen aliases used throughout qbmor.
#ifndef QBMOR_TYPES_HPP
#define QBMOR_TYPES_HPP

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qbmor {

using Index = Eigen::Index;
using cplx = std::complex<double>;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<double>;  ///< column-major sparse
using CSpMat = Eigen::SparseMatrix<cplx>;

template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// \brief Explicit Kronecker product of two dense matrices (small sizes only).
template <class S>
MatT<S> kron(const MatT<S>& X, const MatT<S>& Y) {
  MatT<S> out(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i)
      out.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
  return out;
}

/// \brief Column-major vectorization.
template <class S>
VecT<S> vec(const MatT<S>& X) {
  return Eigen::Map<const VecT<S>>(X.data(), X.size());
}

}  // namespace qbmor

#endif  // QBMOR_TYPES_HPP
