#pragma once

// Small dense linear-algebra helpers shared across modules. All matrices are
// column-major double precision.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

#include "smor/errors.hpp"

namespace smor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline Matrix skew(const Matrix& m) { return 0.5 * (m - m.transpose()); }
inline Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// N x n matrix of i.i.d. standard normal samples, filled column by column.
inline Matrix random_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

/// Orthonormal factor of a thin Householder QR.
inline Matrix thin_q(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

/// ||X^T X - I||_F
inline double orthonormality_residual(const Matrix& x) {
  return (x.transpose() * x - Matrix::Identity(x.cols(), x.cols())).norm();
}

/// Canonical Poisson matrix [[0, I], [-I, 0]] of size 2m.
inline Matrix poisson_matrix(Index m) {
  Matrix j = Matrix::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return j;
}

template <class Derived>
void require_shape(const Eigen::MatrixBase<Derived>& m, Index rows, Index cols,
                   const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

}  // namespace smor
